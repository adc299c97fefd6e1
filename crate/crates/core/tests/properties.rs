use proptest::prelude::*;
use tswipt_core::bound::{component_bound_bits, suboptimal_params};
use tswipt_core::specfun::{bessel_k, q_function};
use tswipt_core::{
    harvest, simulate_trace, ChannelRealization, EhParams, InputDistribution, TemperatureChannel, ThermalParams,
    average_harvested_closed, BoundSettings,
};

fn channel_inputs() -> impl Strategy<Value = (f64, Vec<f64>, Vec<f64>)> {
    (1usize..=8).prop_flat_map(|n| {
        (
            0.0..=1.0f64,
            prop::collection::vec(1e-3..10.0f64, n),
            prop::collection::vec(0.0..20.0f64, n),
        )
    })
}

proptest! {
    #[test]
    fn zero_noise_trace_is_affine_in_input((beta, gains, powers) in channel_inputs()) {
        let params = ThermalParams { beta, ..ThermalParams::default() };
        let real = ChannelRealization::new(gains).unwrap();
        let ch = TemperatureChannel::build(&params, &real).unwrap();
        let trace = simulate_trace(&params, &real, &powers, &vec![0.0; powers.len()]).unwrap();
        prop_assert_eq!(trace.temps[0], params.t_env);
        for i in 0..powers.len() {
            let expected: f64 = params.t_env + (0..=i).map(|k| ch.matrix_a()[(i, k)] * powers[k]).sum::<f64>();
            prop_assert!((trace.temps[i + 1] - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }
    }

    #[test]
    fn q_is_symmetric_and_decreasing(x in -30.0..35.0f64) {
        prop_assert!((q_function(x) + q_function(-x) - 1.0).abs() <= 1e-14);
        // Below about -8 the value rounds to 1.
        if x > -5.0 {
            prop_assert!(q_function(x + 1e-3) < q_function(x));
        }
    }

    #[test]
    fn bessel_recurrence(x in 1e-3..50.0f64) {
        let (k0, k1, k2) = (bessel_k(0, x).unwrap(), bessel_k(1, x).unwrap(), bessel_k(2, x).unwrap());
        prop_assert!(((k2 - k0 - 2.0 / x * k1) / k2).abs() <= 1e-12);
    }

    #[test]
    fn harvester_is_bounded_and_monotone(p in 0.0..10.0f64, dp in 0.0..1.0f64) {
        let eh = EhParams::default();
        let (a, b) = (harvest(p, &eh).unwrap(), harvest(p + dp, &eh).unwrap());
        prop_assert!(0.0 <= a && a <= b && b <= eh.ceiling());
    }

    #[test]
    fn average_energy_within_ceiling(e in 1e-3..1e3f64) {
        let eh = EhParams::default();
        for d in InputDistribution::ALL {
            let v = average_harvested_closed(d, e, &eh).unwrap().value;
            prop_assert!((0.0..=eh.ceiling()).contains(&v));
        }
    }

    #[test]
    fn bound_component_is_nonnegative(amp in 0.0..1e3f64) {
        let sub = suboptimal_params(amp, 1.0);
        prop_assert!(sub.gamma > 0.0 && sub.delta >= 0.0);
        prop_assert!(component_bound_bits(amp, 1.0, &BoundSettings::default()) >= 0.0);
    }
}
