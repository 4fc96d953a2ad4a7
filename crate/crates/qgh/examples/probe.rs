use qgh::graph::Graph;
use qgh::membership::{vect_homomorphism_feasibility_with, GramOutcome};
use qgh::sdp::SolveParams;

fn main() {
    for g in [Graph::cycle(5).unwrap(), Graph::complete(3).unwrap()] {
        let params = SolveParams { record_trace: true, trace_every: 500, ..Default::default() };
        let out = vect_homomorphism_feasibility_with(&g, &g, true, &params).unwrap();
        match out {
            GramOutcome::Feasible(w) => println!("{g}: feasible, issues: {:?}", w.verify()),
            GramOutcome::Infeasible { affine_inconsistent } => {
                println!("{g}: INFEASIBLE affine_inconsistent={affine_inconsistent}");
            }
        }
    }
}
