use std::fmt::Write as _;
use std::path::Path;

use super::compare::OracleRow;
use super::sweep::SweepRow;
use crate::error::Result;

pub const SWEEP_HEADER: &str =
    "variant,n_users,r_req_bps,mean_ee_bpj,std_ee_bpj,mean_sum_rate_bps,mean_tx_power_w,outage_fraction,n_drops";

pub const ORACLE_HEADER: &str =
    "instance,seed,r_req_bps,heuristic_ee_bpj,snapped_ee_bpj,structure_ee_bpj,oracle_ee_bpj,snapped_over_oracle,outage_users";

/// Nine significant digits in scientific notation, e.g. `1.23456789e6`.
pub fn sci(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.variant,
            r.n_users,
            sci(r.r_req_bps),
            sci(r.mean_ee_bits_per_joule),
            sci(r.std_ee),
            sci(r.mean_sum_rate_bps),
            sci(r.mean_tx_power_w),
            sci(r.outage_fraction),
            r.n_drops
        );
    }
    out
}

pub fn write_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, sweep_csv(rows))?;
    Ok(())
}

pub fn oracle_csv(rows: &[OracleRow]) -> String {
    let mut out = String::new();
    out.push_str(ORACLE_HEADER);
    out.push('\n');
    let opt = |x: Option<f64>| x.map(sci).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.instance,
            r.seed,
            sci(r.r_req_bps),
            sci(r.heuristic_ee),
            opt(r.snapped_ee),
            opt(r.structure_ee),
            opt(r.oracle_ee),
            opt(r.ratio()),
            r.outage_users
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::Variant;

    #[test]
    fn header_only_for_no_rows() {
        assert_eq!(sweep_csv(&[]), format!("{SWEEP_HEADER}\n"));
    }

    #[test]
    fn scientific_format() {
        assert_eq!(sci(123456789.0), "1.23456789e8");
        assert_eq!(sci(0.0), "0.00000000e0");
        assert_eq!(sci(-2.5e-3), "-2.50000000e-3");
    }

    #[test]
    fn row_round_trips_through_csv_reader() {
        let row = SweepRow {
            variant: Variant::Kmeans,
            n_users: 32,
            r_req_bps: 1.5e5,
            mean_ee_bits_per_joule: 4.12345678e7,
            std_ee: 1.0e6,
            mean_sum_rate_bps: 2.5e8,
            mean_tx_power_w: 0.75,
            outage_fraction: 0.125,
            n_drops: 10,
        };
        let text = sweep_csv(std::slice::from_ref(&row));
        assert!(!text.contains('\r'));
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let headers: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
        assert_eq!(headers.join(","), SWEEP_HEADER);
        let rec = rdr.records().next().unwrap().unwrap();
        assert_eq!(&rec[0], "kmeans");
        assert_eq!(rec[1].parse::<usize>().unwrap(), 32);
        assert_eq!(rec[2].parse::<f64>().unwrap(), 1.5e5);
        assert_eq!(rec[3].parse::<f64>().unwrap(), 4.12345678e7);
        assert_eq!(rec[6].parse::<f64>().unwrap(), 0.75);
        assert_eq!(rec[7].parse::<f64>().unwrap(), 0.125);
        assert_eq!(rec[8].parse::<usize>().unwrap(), 10);
    }
}
