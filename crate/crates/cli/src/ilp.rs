//! LP-format export of the full binary caching program.
//!
//! Variables, all binary, 1-based in slot `t` and content `f`:
//!   `x_t_f`    content f occupies the cache in slot t
//!   `a_t_f_i`  content f is cached in slot t with age i, i in 0..=t-1
//!
//! Rows:
//!   `cap_t`        per-slot capacity
//!   `def_t_f`      a cached content carries exactly one age
//!   `act_t_f_i`    a kept content ages by one unless re-downloaded
//!   `chain_t_f_i`  age i in slot t requires age i-1 in slot t-1, so every
//!                  age chain starts at a fresh download
//!
//! The objective carries the constant server-only serving cost so that the
//! optimum value matches the schedule cost directly.

use std::fmt::Write;

use cachesched::model::Instance;

fn num(v: f64) -> String {
    format!("{v}")
}

/// One `coeff name` term with explicit sign, appended with surrounding
/// spacing. `first` terms keep a leading minus but no plus.
fn push_term(out: &mut String, first: bool, coeff: f64, name: &str) {
    if first {
        if coeff < 0.0 {
            let _ = write!(out, " -{} {name}", num(-coeff));
        } else {
            let _ = write!(out, " {} {name}", num(coeff));
        }
    } else if coeff < 0.0 {
        let _ = write!(out, " - {} {name}", num(-coeff));
    } else {
        let _ = write!(out, " + {} {name}", num(coeff));
    }
}

pub fn ilp_text(inst: &Instance) -> String {
    let num_slots = inst.num_slots();
    let num_contents = inst.num_contents();
    let cs = inst.cost_server();
    let cb = inst.cost_cache();
    let lambda = inst.aoi_weight();

    let mut out = String::from("Minimize\n obj:");
    let constant: f64 = (0..num_contents)
        .map(|f| {
            (0..num_slots)
                .map(|t| inst.size(f) * f64::from(inst.demand(f, t)) * cs)
                .sum::<f64>()
        })
        .sum();
    let mut first = true;
    if constant != 0.0 {
        push_term(&mut out, first, constant, "");
        // Trailing space from the empty name is harmless but ugly.
        out.truncate(out.trim_end().len());
        first = false;
    }
    for t in 1..=num_slots {
        for f in 1..=num_contents {
            let l = inst.size(f - 1);
            let m = f64::from(inst.demand(f - 1, t - 1));
            let serve = l * m * (cb - cs);
            if serve != 0.0 {
                push_term(&mut out, first, serve, &format!("x_{t}_{f}"));
                first = false;
            }
            push_term(&mut out, first, inst.refresh_cost(f - 1), &format!("a_{t}_{f}_0"));
            first = false;
            for i in 1..t {
                let pen = lambda * inst.penalty(f - 1, i as u32) * m;
                if pen != 0.0 {
                    push_term(&mut out, first, pen, &format!("a_{t}_{f}_{i}"));
                }
            }
        }
    }
    out.push_str("\nSubject To\n");

    for t in 1..=num_slots {
        let _ = write!(out, " cap_{t}:");
        for f in 1..=num_contents {
            push_term(&mut out, f == 1, inst.size(f - 1), &format!("x_{t}_{f}"));
        }
        let _ = writeln!(out, " <= {}", num(inst.capacity()));
    }

    for t in 1..=num_slots {
        for f in 1..=num_contents {
            let _ = write!(out, " def_{t}_{f}:");
            for i in 0..t {
                push_term(&mut out, i == 0, 1.0, &format!("a_{t}_{f}_{i}"));
            }
            push_term(&mut out, false, -1.0, &format!("x_{t}_{f}"));
            out.push_str(" = 0\n");
        }
    }

    for t in 2..=num_slots {
        for f in 1..=num_contents {
            for i in 1..t {
                let prev = format!("a_{}_{}_{}", t - 1, f, i - 1);
                let _ = write!(out, " act_{t}_{f}_{i}:");
                push_term(&mut out, true, 1.0, &format!("x_{t}_{f}"));
                push_term(&mut out, false, 1.0, &prev);
                push_term(&mut out, false, -1.0, &format!("a_{t}_{f}_0"));
                push_term(&mut out, false, -1.0, &format!("a_{t}_{f}_{i}"));
                out.push_str(" <= 1\n");
                let _ = write!(out, " chain_{t}_{f}_{i}:");
                push_term(&mut out, true, 1.0, &format!("a_{t}_{f}_{i}"));
                push_term(&mut out, false, -1.0, &prev);
                out.push_str(" <= 0\n");
            }
        }
    }

    out.push_str("Binary\n");
    for t in 1..=num_slots {
        for f in 1..=num_contents {
            let _ = writeln!(out, " x_{t}_{f}");
            for i in 0..t {
                let _ = writeln!(out, " a_{t}_{f}_{i}");
            }
        }
    }
    out.push_str("End\n");
    out
}
