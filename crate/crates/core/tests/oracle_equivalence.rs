use squeeze_dyn::model::{ChannelKind, Definition};
use squeeze_dyn::oracle::decohered_squeezing;
use squeeze_dyn::squeezing::{ClosedForm, OatState};

const NS: [usize; 4] = [2, 3, 4, 6];
const ALPHAS: [f64; 3] = [0.05, 0.2, 0.5];
const KAPPAS: [f64; 4] = [1.0, 0.7, 0.3, -0.4];

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= tol
}

#[test]
fn corrected_forms_match_oracle_on_grid() {
    let mut worst: f64 = 0.0;
    for n in NS {
        for alpha in ALPHAS {
            let st = OatState::new(n, alpha).unwrap();
            for kappa in KAPPAS {
                for ch in ChannelKind::ALL {
                    let o = decohered_squeezing(n, alpha, ch, kappa).unwrap();
                    for (def, want) in [
                        (Definition::KitagawaUeda, o.xi2.xi2),
                        (Definition::Toth, o.xi2_prime.xi2),
                    ] {
                        let got = st
                            .decohered(ch, def, kappa, ClosedForm::Corrected)
                            .unwrap()
                            .xi2;
                        assert!(
                            close(got, want, 1e-8),
                            "{ch} {def} n={n} alpha={alpha} kappa={kappa}: {got} vs {want}"
                        );
                        if want.is_finite() {
                            worst = worst.max((got - want).abs());
                        }
                    }
                }
            }
        }
    }
    println!("max deviation {worst:e}");
}

#[test]
fn printed_dephasing_disagrees_with_oracle() {
    // N=4, alpha=0.3, kappa=0.6
    let o = decohered_squeezing(4, 0.3, ChannelKind::Dephasing, 0.6).unwrap();
    let st = OatState::new(4, 0.3).unwrap();
    let printed = st
        .decohered(
            ChannelKind::Dephasing,
            Definition::KitagawaUeda,
            0.6,
            ClosedForm::Printed,
        )
        .unwrap()
        .xi2;
    assert!((printed - o.xi2.xi2).abs() > 1e-3);
}
