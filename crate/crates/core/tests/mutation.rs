use fvroe::check::{random_pairs, roe_property_residual};
use fvroe::gas::GasModel;
use fvroe::roe::{roe_average, roe_matrix};

#[test]
fn perturbed_roe_average_fails_the_roe_property() {
    let gas = GasModel::default();
    let pairs = random_pairs(&gas, 7, 1000);
    let clean = roe_property_residual(&gas, &pairs, roe_matrix).unwrap();
    assert!(clean <= 1e-11, "clean residual {clean}");
    let mutated = roe_property_residual(&gas, &pairs, |gas, wl, wr| {
        let avg = roe_average(gas, wl, wr)?;
        Ok(gas.jacobian_uh(avg.u + 1e-3, avg.h))
    })
    .unwrap();
    assert!(mutated > 1e-11, "mutated residual {mutated}");
}
