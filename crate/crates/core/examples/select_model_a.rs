//! Cross-validation bandwidth for one simulated model (a) series, with the
//! oracle and plug-in bandwidths for comparison.

use lscv::estimator::FitOptions;
use lscv::likelihood::objective_for;
use lscv::presets::Preset;
use lscv::processes::simulate;
use lscv::selection::plugin::plugin_h0;
use lscv::selection::{distance_da_table, select_bandwidth_full, InfoMatrices};
use lscv::{epanechnikov, BandwidthGrid, Innovation, ThetaBox, WeightFn};

fn main() -> lscv::Result<()> {
    let model = Preset::A;
    let (n, seed) = (500, 42);
    let family = model.family();
    let curve = model.curve();
    let xs = simulate(&model.spec(Innovation::Gaussian), &curve, n, seed)?.values;

    let kernel = epanechnikov();
    let weight = WeightFn::default();
    let (mut report, evals) = select_bandwidth_full(
        objective_for(family).as_ref(),
        &xs,
        &kernel,
        &weight,
        &BandwidthGrid::default(),
        &ThetaBox::standard(family),
        &FitOptions::default(),
    )?;

    let info = InfoMatrices::closed_form(family, Innovation::Gaussian)?;
    let table = info.v_table(&curve, n, &weight.indices(n))?;
    let d_a = evals
        .iter()
        .map(|e| distance_da_table(&e.fit, &curve, &table))
        .collect::<lscv::Result<Vec<_>>>()?;
    report.set_distances(d_a);
    report.set_plugin(&plugin_h0(family, &curve, &kernel, &weight, n, &info)?);

    println!("h_hat  = {:.4}", report.h_hat);
    println!("h_star = {:.4}", report.h_star.unwrap_or(f64::NAN));
    println!("h_0    = {:.4}", report.h_0.unwrap_or(f64::NAN));
    Ok(())
}
