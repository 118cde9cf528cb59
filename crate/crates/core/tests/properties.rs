use proptest::prelude::*;
use sublaser_core::protocols::{
    shannon_information, snr_at, teleport_fidelity_saturated, DenseCodingParams, EprSource,
};
use sublaser_core::quadrature::{integrate_real_line, QuadOptions};
use sublaser_core::spectra::{
    external_x, external_y, spectral_matrix_at, x_variance, y_variance, Form, TransferModel,
};
use sublaser_core::{solve_steady_state, LaserParams, OperatingPoint};

/// Valid parameters with a prescribed injection ratio `mu`.
fn laser(kappa: f64, g: f64, gamma1: f64, r: f64, p: f64, mu: f64) -> LaserParams {
    let n = r / kappa / (1.0 - mu);
    LaserParams::new(kappa, g, gamma1 * kappa, 1e3 * kappa, 1e3 * kappa, r, p, mu * mu * n, 0.0).unwrap()
}

fn params() -> impl Strategy<Value = LaserParams> {
    (
        -1.0f64..1.0,
        0.005f64..0.5,
        1e-3f64..0.1,
        5.0f64..8.0,
        0.0f64..=1.0,
        1e-4f64..0.1,
    )
        .prop_map(|(lk, g, gamma1, lr, p, mu)| {
            let kappa = 10f64.powf(lk);
            laser(kappa, g, gamma1, kappa * 10f64.powf(lr), p, mu)
        })
}

fn op(p: &LaserParams) -> OperatingPoint {
    solve_steady_state(p).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn closed_forms_equal_transfer_matrix(params in params(), w in -20.0f64..20.0) {
        let o = op(&params);
        let model = TransferModel::from_operating_point(&o).unwrap();
        let w = w * o.kappa();
        let s = spectral_matrix_at(&model, w).unwrap();
        prop_assert!((s[(0, 0)].re / x_variance(&o, w, Form::Full) - 1.0).abs() < 1e-10);
        prop_assert!((s[(1, 1)].re / y_variance(&o, w) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn uncertainty_product_bounded(params in params(), w in -20.0f64..20.0) {
        let o = op(&params);
        let w = w * o.kappa();
        for form in [Form::Full, Form::Saturated] {
            let product = external_x(&o, w, form) * external_y(&o, w);
            prop_assert!(product >= 1.0 / 16.0 * (1.0 - 1e-12), "{form:?}: {product}");
        }
    }

    #[test]
    fn spectra_are_even(params in params(), w in 0.0f64..20.0) {
        let o = op(&params);
        for form in [Form::Full, Form::Saturated] {
            prop_assert_eq!(x_variance(&o, w, form), x_variance(&o, -w, form));
        }
        prop_assert_eq!(y_variance(&o, w), y_variance(&o, -w));
    }

    #[test]
    fn photon_number_monotone_in_injection(params in params(), extra in 0.0f64..1e4) {
        let a = op(&params);
        let mut more = params;
        more.n_in += extra;
        let b = op(&more);
        prop_assert!(b.n >= a.n);
        // n_in = mu^2 n round trip
        prop_assert!((a.mu * a.mu * a.n / params.n_in - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_running_photon_number(params in params()) {
        let mut free = params;
        free.n_in = 0.0;
        let o = op(&free);
        prop_assert_eq!(o.mu, 0.0);
        prop_assert!((o.n * free.kappa / free.pump_rate_r - 1.0).abs() < 4.0 * f64::EPSILON);
    }

    #[test]
    fn poisson_pump_never_entangles(params in params(), w in -20.0f64..20.0) {
        let mut poisson = params;
        poisson.pump_p = 0.0;
        let src = EprSource::symmetric(&poisson).unwrap();
        let w = w * src.kappa();
        let v = sublaser_core::protocols::duan_closed_form(&src.laser1, w);
        prop_assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn snr_grows_with_pump_regularity(params in params(), w in -5.0f64..5.0, r in 0.001f64..0.5) {
        let dc = DenseCodingParams::new(r, params.kappa, params.kappa).unwrap();
        let w = w * params.kappa;
        let mut prev = 0.0;
        for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let mut lp = params;
            lp.pump_p = p;
            let src = EprSource::symmetric(&lp).unwrap();
            let snr = snr_at(&src, &dc, w, Form::Saturated);
            prop_assert!(snr >= prev * (1.0 - 1e-12));
            prev = snr;
        }
    }

    #[test]
    fn information_below_linear_bound(params in params(), r in 0.001f64..0.5, flux in 0.1f64..10.0, width in 0.1f64..10.0) {
        let src = EprSource::symmetric(&params).unwrap();
        let k = src.kappa();
        let dc = DenseCodingParams::new(r, flux * k, width * k).unwrap();
        let info = shannon_information(&src, &dc, Form::Full).unwrap();
        let linear = integrate_real_line(|w| snr_at(&src, &dc, w, Form::Full), width * k, QuadOptions::abs(1e-10)).unwrap();
        prop_assert!(info.raw <= linear.value + 1e-9);
    }

    #[test]
    fn fidelity_between_classical_and_perfect(params in params(), w in 0.0f64..20.0) {
        let o = op(&params);
        let w = w * o.kappa();
        let f = teleport_fidelity_saturated(&o, w);
        prop_assert!((0.5..=1.0).contains(&f), "{f}");
        prop_assert_eq!(f, teleport_fidelity_saturated(&o, -w));
    }
}
