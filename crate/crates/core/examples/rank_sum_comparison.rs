//! Compare two samples of tour lengths with the Wilcoxon rank-sum test.

use qatsp::stats::{wilcoxon_rank_sum, write_table_csv, TableRow};

fn main() -> qatsp::Result<()> {
    let r = [
        3735.0, 3653.0, 3614.0, 3644.0, 3693.0, 3231.0, 3311.0, 3703.0, 3527.0, 3414.0,
    ];
    let h = [
        3623.0, 3213.0, 3216.0, 3216.0, 3819.0, 3208.0, 3604.0, 3216.0, 3216.0, 3216.0,
    ];
    let test = wilcoxon_rank_sum(&h, &r)?;
    println!(
        "h {:.1} +- {:.1} vs r {:.1} +- {:.1}: z = {:.4}, p = {:.4}, verdict {:?}",
        test.mean_first,
        test.std_first,
        test.mean_second,
        test.std_second,
        test.z,
        test.p_two_sided,
        test.verdict
    );
    let row = TableRow::compare("burma12", Some(3150), &r, &h)?;
    write_table_csv(&[row], std::io::stdout())?;
    Ok(())
}
