//! ẍ = −ω(t) x^μ − (k/t) ẋ: the damped family with φ = −k/t.

use num_traits::{One, Signed, Zero};

use super::{nonlin_qfi_general, DampError, NonlinFamily, Reparam};
use crate::catalog::FirstIntegral;
use crate::symexpr::{rat_int, Expr, Rat};

#[derive(Clone, Debug)]
pub struct LaneEmdenCase {
    pub k: Rat,
    pub mu: Rat,
    pub c: [Rat; 3],
}

#[derive(Clone, Debug)]
pub struct LaneEmden {
    pub omega: Expr,
    /// Integral rescaled to the conventional normalization of its subcase.
    pub integral: FirstIntegral,
    /// "Case N" for the one-hot patterns, "general" otherwise.
    pub label: String,
    pub detail: String,
    /// ω = A t^p for the one-hot patterns.
    pub a: Option<Expr>,
}

fn rpow(r: &Rat, e: Rat) -> Expr {
    Expr::num(r.clone()).pow(e)
}

pub fn lane_emden(case: &LaneEmdenCase) -> Result<LaneEmden, DampError> {
    let LaneEmdenCase { k, mu, c } = case;
    if *mu == rat_int(-1) {
        return Err(DampError::MuMinusOne);
    }
    let fam = NonlinFamily {
        mu: mu.clone(),
        reparam: Reparam::power_law(k),
        c: [Expr::num(c[0].clone()), Expr::num(c[1].clone()), Expr::num(c[2].clone())],
    };
    let res = nonlin_qfi_general(&fam)?;
    let one_hot: Vec<usize> = (0..3).filter(|&i| !c[i].is_zero()).collect();
    let two = rat_int(2);
    let e_omega = -(mu + rat_int(3)) / &two;
    let k_is_one = k.is_one();
    let one_k = Rat::one() - k;
    let positive = |r: &Rat, what: &str| {
        if r.is_positive() {
            Ok(())
        } else {
            Err(DampError::Precondition(format!("{what} must be positive for a real omega")))
        }
    };
    let (label, detail, scale, a) = match (one_hot.as_slice(), k_is_one) {
        ([0], true) => {
            positive(&c[0], "c1")?;
            ("Case 5", "k = 1, c1 only".to_string(), Rat::one() / (&two * &c[0]), rpow(&c[0], e_omega))
        }
        ([1], true) => {
            positive(&c[1], "c2")?;
            ("Case 6", "k = 1, c2 only".to_string(), Rat::one() / (&two * &c[1]), rpow(&c[1], e_omega))
        }
        ([2], true) => {
            positive(&c[2], "c3")?;
            ("Case 7", "k = 1, c3 only".to_string(), Rat::one() / (&two * &c[2]), rpow(&c[2], e_omega))
        }
        ([0], false) => {
            positive(&c[0], "c1")?;
            ("Case 2", "k != 1, c1 only".to_string(), Rat::one() / (&two * &c[0]), rpow(&c[0], e_omega))
        }
        ([1], false) => {
            let base = &c[1] / &one_k;
            positive(&base, "c2/(1-k)")?;
            let special = *mu != Rat::one() && *k == (mu + rat_int(3)) / (mu - Rat::one());
            let (label, detail) = if special {
                ("Case 1", "k = (mu+3)/(mu-1), c2 only: constant omega".to_string())
            } else {
                ("Case 3", "k != 1, c2 only".to_string())
            };
            (label, detail, &one_k / &c[1], rpow(&base, e_omega))
        }
        ([2], false) => {
            positive(&c[2], "c3")?;
            let special = *k == (mu + rat_int(3)) / (mu + Rat::one());
            let (label, detail) = if special {
                ("Case 1", "k = (mu+3)/(mu+1), c3 only: constant omega".to_string())
            } else {
                ("Case 4", "k != 1, c3 only".to_string())
            };
            let sq = &one_k * &one_k;
            (label, detail, &sq / (&two * &c[2]), rpow(&(&sq / &c[2]), -e_omega))
        }
        _ => {
            let mut integral = res.integral;
            integral.name = "I".into();
            return Ok(LaneEmden {
                omega: res.omega,
                integral,
                label: "general".into(),
                detail: "several nonzero c_i".into(),
                a: None,
            });
        }
    };
    let mut integral = res.integral;
    integral.expr = Expr::num(scale) * &integral.expr;
    Ok(LaneEmden { omega: res.omega, integral, label: label.into(), detail, a: Some(a) })
}
