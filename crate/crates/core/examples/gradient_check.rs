//! BPTT, summed RTRL and central finite differences on one small Elman
//! network, plus the spread of UORO's one-sample estimates.

use tncn::baselines::{
    bptt_gradients, rtrl_step, sequence_loss, uoro_step, ElmanConfig, ElmanModel, RtrlCarry, UoroCarry,
};
use tncn::numerics::gaussian_init;
use tncn::ptncn::OutputLikelihood;
use tncn::{Matrix, Rng};

fn main() -> tncn::Result<()> {
    let mut rng = Rng::new(3);
    let cfg = ElmanConfig::new(3, 5, 2, OutputLikelihood::Gaussian);
    let model = ElmanModel::new(&cfg, 0.4, &mut rng)?;
    let xs: Vec<Matrix> = (0..12).map(|_| gaussian_init(3, 1, 1.0, &mut rng)).collect();
    let ts: Vec<Matrix> = (0..12).map(|_| gaussian_init(2, 1, 1.0, &mut rng)).collect();
    let z0 = Matrix::zeros(5, 1);

    let bptt = bptt_gradients(&model, &z0, &xs, &ts)?;
    let mut carry = RtrlCarry::new(&model);
    let mut rtrl = model.zero_grads();
    for (x, t) in xs.iter().zip(&ts) {
        rtrl.add(&rtrl_step(&model, &mut carry, x, t)?.0);
    }
    println!("max |bptt - rtrl|      {:.2e}", bptt.max_abs_diff(&rtrl));

    let eps = 1e-5;
    let mut worst = 0.0f64;
    let flat = bptt.flatten();
    let mut k = 0;
    for pi in 0..5 {
        for j in 0..model.params()[pi].len() {
            let mut plus = model.clone();
            plus.params_mut()[pi].as_mut_slice()[j] += eps;
            let mut minus = model.clone();
            minus.params_mut()[pi].as_mut_slice()[j] -= eps;
            let fd = (sequence_loss(&plus, &z0, &xs, &ts)? - sequence_loss(&minus, &z0, &xs, &ts)?) / (2.0 * eps);
            worst = worst.max((fd - flat[k]).abs() / fd.abs().max(flat[k].abs()).max(1e-8));
            k += 1;
        }
    }
    println!("max relative fd error  {worst:.2e}");

    // UORO targets only the last step's loss here
    let last = ts.len() - 1;
    let mut exact = None;
    let mut carry = RtrlCarry::new(&model);
    for (i, x) in xs.iter().enumerate() {
        let g = rtrl_step(&model, &mut carry, x, &ts[last])?.0;
        if i == last {
            exact = Some(g);
        }
    }
    let exact = exact.expect("non-empty sequence");
    let mut mean = model.zero_grads();
    let draws = 20_000;
    let mut noise = Rng::new(4);
    for _ in 0..draws {
        let mut c = UoroCarry::new(&model);
        let mut g = None;
        for x in &xs {
            g = Some(uoro_step(&model, &mut c, x, &ts[last], &mut noise)?.0);
        }
        mean.add(&g.expect("non-empty sequence"));
    }
    mean.scale(1.0 / draws as f64);
    println!("uoro mean vs rtrl      {:.2e} (max abs, {draws} draws)", mean.max_abs_diff(&exact));
    Ok(())
}
