/// 8-point Gauss–Legendre abscissae on [0, 1].
pub const GL8_NODES: [f64; 8] = [
    0.019_855_071_751_231_856,
    0.101_666_761_293_186_63,
    0.237_233_795_041_835_5,
    0.408_282_678_752_175_1,
    0.591_717_321_247_824_9,
    0.762_766_204_958_164_5,
    0.898_333_238_706_813_4,
    0.980_144_928_248_768_1,
];

/// Weights matching [`GL8_NODES`]; they sum to one.
pub const GL8_WEIGHTS: [f64; 8] = [
    0.050_614_268_145_188_13,
    0.111_190_517_226_687_24,
    0.156_853_322_938_943_64,
    0.181_341_891_689_180_99,
    0.181_341_891_689_180_99,
    0.156_853_322_938_943_64,
    0.111_190_517_226_687_24,
    0.050_614_268_145_188_13,
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_degree_15_polynomials_exactly() {
        for degree in 0..=15 {
            let numeric: f64 =
                GL8_NODES.iter().zip(GL8_WEIGHTS).map(|(x, w)| w * x.powi(degree)).sum();
            let exact = 1.0 / (degree as f64 + 1.0);
            assert!((numeric - exact).abs() < 1e-14, "degree {degree}: {numeric} vs {exact}");
        }
    }
}
