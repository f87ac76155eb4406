//! Negotiation counts, per-primitive operation counts and time/energy of
//! the three schemes, plus the CSV series behind the comparison plots.

use wsn_keymgmt::metrics::{
    negotiation_counts, operation_counts, render_report, time_energy, CostModel, ProposedBasis, ReportSpec, SchemeId,
};

fn main() {
    let model = CostModel::default();
    println!("{:<11} {:>5} {:>12} {:>14}", "scheme", "M=10", "time (s)", "energy (mJ)");
    for s in SchemeId::ALL {
        let (t, e) = time_energy(s, 10, &model, ProposedBasis::AsPrinted);
        println!("{:<11} {:>5} {:>12.3} {:>14.3}", s.name(), negotiation_counts(s, 10, 1), t, e);
    }
    let (t, e) = time_energy(SchemeId::Proposed, 10, &model, ProposedBasis::PerNegotiation);
    println!("Proposed counted per negotiation (M + 1): {t:.3} s, {e:.3} mJ");

    println!("\noperation counts at M = 4 (first side, second side):");
    for s in SchemeId::ALL {
        let row: Vec<String> = operation_counts(s, 4).iter().map(|(p, c)| format!("{p:?}={}/{}", c.first, c.second)).collect();
        println!("  {:<11} {}", s.name(), row.join(" "));
    }

    let spec = ReportSpec { ms: (1..=12).collect(), ns: vec![1], schemes: SchemeId::ALL.to_vec(), ..Default::default() };
    println!("\n{}", render_report(&spec));
}
