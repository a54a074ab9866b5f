use shannon_core::compile::*;
use shannon_core::desc::{Description, Exponent, Instance, Kind, Space};
use shannon_core::dyadic::Dyadic;
use shannon_core::error::Error;
use shannon_core::fuzz;
use shannon_core::witness::g_description;

fn doc(s: &str) -> Description {
    Description::parse(s).unwrap()
}

const ZERO: &str = "space Bpi; p 2; kind continuous; generator { L(n) = 0; c(n, k) = 0 } modulus { xi(M) = M }";
const SINC_INF: &str =
    "space Bpi; p inf; kind continuous; generator { L(n) = 0; c(n, k) = 1 } modulus { xi(M) = 2*M + 1 }";
const DELTA: &str = "space lp; p 2; kind discrete; generator { L(n) = 0; c(n, k) = 1 } modulus { xi(M) = M }";

#[test]
fn zero_description_samples_to_zero() {
    let c = compile_sampling(&doc(ZERO)).unwrap();
    assert_eq!(c.report.shift, 0);
    assert_eq!(c.description.kind, Kind::Discrete);
    assert_eq!(c.description.space, Space::Lp);
    for n in 0..4 {
        assert!(c.description.instantiate(n).unwrap().samples().is_zero());
    }
}

#[test]
fn sinc_at_inf_samples_to_delta() {
    let d = doc(SINC_INF);
    let c = compile_sampling(&d).unwrap();
    assert_eq!(c.report.shift, 0);
    let x = c.description.instantiate(3).unwrap();
    let x = x.as_sequence().unwrap();
    assert_eq!(x.re().len(), 1);
    assert_eq!(x.re()[0].0, 0);
    assert!(x.re()[0].1.is_exact_one());
    for m in 0..=32 {
        assert_eq!(c.description.modulus_of(m).unwrap(), d.modulus_of(m).unwrap());
    }
}

#[test]
fn delta_interpolates_to_sinc() {
    let c = compile_interpolation(&doc(DELTA), &ConstantTable::default()).unwrap();
    assert_eq!(c.report.shift, 0);
    let f = c.description.instantiate(0).unwrap();
    assert_eq!(f, Instance::Signal(shannon_core::signal::ElementarySignal::unit()));
}

#[test]
fn element_identity_on_fuzzed_documents() {
    let mut r = fuzz::rng(99);
    let table = ConstantTable::default();
    for i in 0..20 {
        let p = if i % 3 == 0 { "3/2" } else { "2" };
        let d = fuzz::description(&mut r, true, p);
        let s = compile_sampling(&d).unwrap();
        let x = fuzz::description(&mut r, false, "2");
        let t = compile_interpolation(&x, &table).unwrap();
        for n in 0..=16 {
            let f = d.instantiate(n).unwrap();
            let g = s.description.instantiate(n).unwrap();
            assert_eq!(g, Instance::Sequence(f.samples()), "{d}");
            let y = x.instantiate(n).unwrap();
            let h = t.description.instantiate(n).unwrap();
            assert_eq!(h, Instance::Signal(y.as_sequence().unwrap().interpolate()));
        }
        for m in 0..=32 {
            let c = s.report.shift as u64;
            assert_eq!(s.description.modulus_of(m).unwrap(), d.modulus_of(c + m).unwrap());
        }
    }
}

#[test]
fn sampling_shift_values() {
    assert_eq!(sampling_shift(&Exponent::two()).unwrap().0, 0);
    assert_eq!(sampling_shift(&Exponent::Inf).unwrap().0, 0);
    // log2 C1 = 1 at p = 1: 2^0 (1 + pi)
    let one = sampling_shift(&Exponent::one()).unwrap().0;
    assert_eq!(one, ((1.0 + std::f64::consts::PI).log2()).ceil() as u32);
    for (p, pf) in [("3/2", 1.5f64), ("3", 3.0), ("4", 4.0)] {
        let want = ((1.0 - 1.0 / pf) + (1.0 + std::f64::consts::PI.powf(pf)).log2() / pf).ceil() as u32;
        assert_eq!(sampling_shift(&p.parse().unwrap()).unwrap().0, want, "p = {p}");
    }
}

#[test]
fn refusal_and_missing_constant() {
    let t = ConstantTable::default();
    for p in ["1", "inf"] {
        let d = doc(&DELTA.replace("p 2", &format!("p {p}")));
        assert!(matches!(compile_interpolation(&d, &t), Err(Error::UnsupportedExponent(_))));
    }
    let d = doc(&DELTA.replace("p 2", "p 3"));
    assert!(matches!(compile_interpolation(&d, &t), Err(Error::MissingConstant(_))));
    // sampling is never refused
    assert!(compile_sampling(&doc(&SINC_INF.replace("p inf", "p 1"))).is_ok());
}

#[test]
fn constant_table_from_toml() {
    let t = ConstantTable::from_toml(
        "[[constant]]\np = \"3\"\nc_r = \"5/2\"\ncitation = \"user supplied bound\"\n",
    )
    .unwrap();
    let d = doc(&DELTA.replace("p 2", "p 3"));
    let c = compile_interpolation(&d, &t).unwrap();
    assert_eq!(c.report.shift, 2);
    assert!(c.report.constant.contains("user supplied bound"));
    assert_eq!(c.description.modulus_of(5).unwrap(), 7);
    // p = 2 is still there
    assert!(compile_interpolation(&doc(DELTA), &t).is_ok());
    for bad in [
        "[[constant]]\np = \"3\"\nc_r = \"2\"\ncitation = \"\"\n",
        "[[constant]]\np = \"3\"\nc_r = \"-1\"\ncitation = \"x\"\n",
        "[[constant]]\np = \"x\"\nc_r = \"2\"\ncitation = \"x\"\n",
        "[[constant]\n",
    ] {
        assert!(matches!(ConstantTable::from_toml(bad), Err(Error::Validation(_))), "{bad}");
    }
}

#[test]
fn report_hashes_and_determinism() {
    let d = doc(ZERO);
    let a = compile_sampling(&d).unwrap();
    let b = compile_sampling(&d).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.report.input_sha256, sha256_hex(&d.serialize()));
    assert_eq!(a.report.output_sha256, sha256_hex(&a.description.serialize()));
    assert_eq!(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    let j = serde_json::to_string(&a.report).unwrap();
    assert!(j.contains("\"direction\":\"sample\""));
}

#[test]
fn wrong_kind_is_rejected() {
    let t = ConstantTable::default();
    assert!(matches!(compile_sampling(&doc(DELTA)), Err(Error::Validation(_))));
    assert!(matches!(compile_interpolation(&doc(ZERO), &t), Err(Error::Validation(_))));
}

#[test]
fn g_family_samples() {
    let c = compile_sampling(&g_description()).unwrap();
    assert_eq!(c.report.shift, 0);
    let x = c.description.instantiate(1).unwrap();
    let x = x.as_sequence().unwrap();
    assert_eq!(x.re().len(), 256);
    // (-1)^k / C(256) with C(256) = -2.39008965...
    let v1 = x.at(1).0.to_enclosure(40).to_f64();
    let v2 = x.at(2).0.to_enclosure(40).to_f64();
    assert!((v1 - 1.0 / 2.390089653).abs() < 1e-8, "{v1}");
    assert!((v1 + v2).abs() < 1e-12);
    assert!(x.at(0).0.is_exact_zero());
}

#[test]
fn roundtrip_depth_16() {
    let mut r = fuzz::rng(5);
    let t = ConstantTable::default();
    for i in 0..8 {
        let d = fuzz::description(&mut r, i % 2 == 1, "2");
        let rep = roundtrip_check(&d, &t, 16, 20).unwrap();
        assert!(rep.pass && rep.modulus_ok && rep.shift == 0);
        assert_eq!(rep.rows.len(), 17);
        assert!(rep.rows.iter().all(|x| x.coefficients_equal && x.distance.contains(&Dyadic::zero())));
    }
}
