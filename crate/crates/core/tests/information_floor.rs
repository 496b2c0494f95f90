//! A scheme that answers every shatter query exactly must separate all `2^p`
//! secrets, so its aux cannot be shorter than `p` bits for most of them.
//! These checks confirm the implemented schemes sit above that floor.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use unlearn_core::adversary::information_floor;
use unlearn_core::instances::{shatter_lb_instance, AllLabelingsOracle};
use unlearn_core::schemes::SchemeSpec;
use unlearn_core::ClassHandle;

const P: usize = 16;

fn instance() -> unlearn_core::instances::LbInstance {
    let class = ClassHandle::oracle(AllLabelingsOracle { m: P });
    let points: Vec<usize> = (0..P).collect();
    shatter_lb_instance(&class, &points).unwrap()
}

#[test]
fn trivial_scheme_never_drops_below_p_bits() {
    let inst = instance();
    let scheme = SchemeSpec::Trivial.build(&inst.class).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let floor = information_floor(&inst, scheme.as_ref(), 64, &mut rng).unwrap();
    assert!(floor.recovered_all);
    assert_eq!(floor.distinct_secrets, 64);
    assert!(floor.min_aux_bits >= P, "{floor:?}");
}

#[test]
fn bounded_scheme_averages_at_least_p_bits() {
    let inst = instance();
    let scheme = SchemeSpec::Bounded { k: P - 1 }.build(&inst.class).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let floor = information_floor(&inst, scheme.as_ref(), 32, &mut rng).unwrap();
    assert!(floor.recovered_all);
    assert!(floor.mean_aux_bits >= P as f64, "{floor:?}");
}
