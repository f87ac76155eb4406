//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use common::{check_golden, event_index, golden_scenario, golden_scenario_path, golden_states};
use wsn_keymgmt::algebra::{fp2_pow, setup_curve, CurveContext, CurvePoint, FieldOps, Fp2Element, Fp2Point};
use wsn_keymgmt::ibe;
use wsn_keymgmt::keyex::NONCE_LEN;
use wsn_keymgmt::metrics::{render_report, time_energy, CostModel, ProposedBasis, ReportSpec, SchemeId};
use wsn_keymgmt::pairing::{modified_pairing, weil_pairing};
use wsn_keymgmt::params::Preset;
use wsn_keymgmt::simnet::topology::{distance, max_cell_diagonal};
use wsn_keymgmt::simnet::{self, parse_app_message, Event, NodeRole, Rejection, ScriptEvent, SimConfig, SimError, BASE_STATION};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, budget_s: u64) -> Result<(), String> {
    if elapsed > Duration::from_secs(budget_s) {
        return Err(format!("took {:.2}s, budget {budget_s}s", elapsed.as_secs_f64()));
    }
    Ok(())
}

// Independent GF(11²) and curve arithmetic on plain integers, with
// β² equal to the field's chosen non-residue.
struct Gf121 {
    d: u64,
}

type E = (u64, u64);
type Pt = Option<(E, E)>;

impl Gf121 {
    const P: u64 = 11;

    fn add(&self, a: E, b: E) -> E {
        ((a.0 + b.0) % Self::P, (a.1 + b.1) % Self::P)
    }
    fn neg(&self, a: E) -> E {
        ((Self::P - a.0) % Self::P, (Self::P - a.1) % Self::P)
    }
    fn mul(&self, a: E, b: E) -> E {
        ((a.0 * b.0 + self.d * a.1 * b.1) % Self::P, (a.0 * b.1 + a.1 * b.0) % Self::P)
    }
    fn all(&self) -> impl Iterator<Item = E> {
        (0..Self::P).flat_map(|a| (0..Self::P).map(move |b| (a, b)))
    }
    fn inv(&self, a: E) -> E {
        self.all().find(|&b| self.mul(a, b) == (1, 0)).unwrap()
    }
    fn padd(&self, a: Pt, b: Pt) -> Pt {
        let ((x1, y1), (x2, y2)) = match (a, b) {
            (None, _) => return b,
            (_, None) => return a,
            (Some(a), Some(b)) => (a, b),
        };
        let lambda = if x1 == x2 {
            if self.add(y1, y2) == (0, 0) {
                return None;
            }
            self.mul(self.mul((3, 0), self.mul(x1, x1)), self.inv(self.mul((2, 0), y1)))
        } else {
            self.mul(self.add(y2, self.neg(y1)), self.inv(self.add(x2, self.neg(x1))))
        };
        let x3 = self.add(self.mul(lambda, lambda), self.neg(self.add(x1, x2)));
        let y3 = self.add(self.mul(lambda, self.add(x1, self.neg(x3))), self.neg(y1));
        Some((x3, y3))
    }
    fn smul(&self, k: u64, a: Pt) -> Pt {
        (0..k).fold(None, |acc, _| self.padd(acc, a))
    }
    fn three_torsion(&self) -> Vec<Pt> {
        let mut v = vec![None];
        for x in self.all() {
            for y in self.all() {
                if self.mul(y, y) == self.add(self.mul(self.mul(x, x), x), (1, 0)) && self.smul(3, Some((x, y))).is_none() {
                    v.push(Some((x, y)));
                }
            }
        }
        v
    }
}

fn lift121(ctx: &CurveContext, pt: Pt) -> Fp2Point {
    let f = ctx.field();
    let e = |v: E| Fp2Element::new(f.element(v.0), f.element(v.1)).unwrap();
    match pt {
        None => CurvePoint::Infinity,
        Some((x, y)) => CurvePoint::new(e(x), e(y)).unwrap(),
    }
}

fn bilinearity_trials(ctx: &CurveContext, trials: usize, rng: &mut ChaCha20Rng) -> Result<Fp2Element, String> {
    let g = ctx.generator();
    let base = modified_pairing(g, g, ctx).map_err(|e| e.to_string())?;
    let q = ctx.q().clone();
    for _ in 0..trials {
        let a = rng.gen_range(BigUint::from(1u32)..q.clone());
        let b = rng.gen_range(BigUint::from(1u32)..q.clone());
        let lhs = modified_pairing(&g.mul(&a), &g.mul(&b), ctx).map_err(|e| e.to_string())?;
        ensure!(lhs == fp2_pow(&base, &(&a * &b)), "bilinearity failed at p={} a={a} b={b}", ctx.p());
    }
    Ok(base)
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let c11 = setup_curve(&BigUint::from(11u32), &BigUint::from(3u32), 0).map_err(|e| e.to_string())?;
    let c1019 = setup_curve(&BigUint::from(1019u32), &BigUint::from(17u32), 0).map_err(|e| e.to_string())?;
    let base11 = bilinearity_trials(&c11, 200, &mut rng)?;
    let base1019 = bilinearity_trials(&c1019, 200, &mut rng)?;

    // Alternating law on all of E[3] over GF(11²), points from the oracle.
    let oracle = Gf121 { d: c11.field().nonresidue().try_into().map_err(|_| "non-residue out of range")? };
    let torsion = oracle.three_torsion();
    ensure!(torsion.len() == 9, "oracle found {} points of E[3]", torsion.len());
    let mut pairs = 0;
    for &s in &torsion {
        let ss = lift121(&c11, s);
        ensure!(weil_pairing(&ss, &ss, &c11).map_err(|e| e.to_string())?.is_one(), "e(T,T) != 1 for {s:?}");
        for &u in &torsion {
            let uu = lift121(&c11, u);
            let st = weil_pairing(&ss, &uu, &c11).map_err(|e| e.to_string())?;
            let ts = weil_pairing(&uu, &ss, &c11).map_err(|e| e.to_string())?;
            ensure!(st.mul(&ts).is_one(), "e(S,T)e(T,S) != 1 for {s:?}, {u:?}");
            pairs += 1;
        }
    }
    let done = format!("400 bilinearity trials, {pairs} alternating pairs, {:.2}s", t.elapsed().as_secs_f64());
    ensure!(!base1019.is_one(), "ê(P,P) = 1 at p=1019; {done}");
    // The GF(11)-rational 3-torsion is {O, (0, ±1)} and φ fixes x = 0, so
    // ê is identically 1 for any p with q = 3. Checked as stated regardless.
    ensure!(!base11.is_one(), "ê(P,P) = 1 at p=11, q=3, the rational 3-torsion lies on x=0 which φ fixes; everything else holds: {done}");
    within(t.elapsed(), 5)?;
    Ok(done)
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for preset in [Preset::Toy32, Preset::Bf256] {
        let (params, msk) = ibe::setup(&preset.p(), &preset.q(), ibe::DEFAULT_N_BITS, &mut rng).map_err(|e| e.to_string())?;
        for i in 0..100 {
            let id: Vec<u8> = (0..rng.gen_range(1..24)).map(|_| rng.gen()).collect();
            let m: Vec<u8> = (0..params.n_bytes()).map(|_| rng.gen()).collect();
            let sk = ibe::extract(&msk, &id, &params).map_err(|e| e.to_string())?;
            let ct = ibe::encrypt(&params, &id, &m, &mut rng).map_err(|e| e.to_string())?;
            let back = ibe::decrypt(&sk, &ct, &params).map_err(|e| e.to_string())?;
            ensure!(back == m, "{} trial {i}: round trip failed", preset.name());
        }
    }
    within(t.elapsed(), 30)?;
    Ok(format!("200 round trips on toy32 and bf256, {:.2}s", t.elapsed().as_secs_f64()))
}

fn criterion_3() -> Outcome {
    let (start, after) = golden_states();
    let mut exchanges = 0;
    let mut prev = 0;
    for net in std::iter::once(&start).chain(&after) {
        // the last key per pair in each step is the one both ends hold
        let mut latest = BTreeMap::new();
        for e in &net.events()[prev..] {
            if let Event::Negotiated { head, peer, key, .. } = e {
                latest.insert((head.clone(), peer.clone()), key.clone());
                exchanges += 1;
            }
        }
        prev = net.events().len();
        for ((head, peer), fp) in latest {
            let hk = net.node(&head).and_then(|n| n.sessions.get(&peer)).ok_or(format!("{head} lost its key with {peer}"))?;
            let pk = net.node(&peer).and_then(|n| n.sessions.get(&head)).ok_or(format!("{peer} lost its key with {head}"))?;
            ensure!(hk.key() == pk.key(), "{head} and {peer} disagree");
            ensure!(hk.fingerprint() == fp, "{head}/{peer} key differs from the logged one");
        }
    }
    let final_events = after.last().unwrap().events();
    let mut rounds = 0;
    for (subnet, epoch, cause, members, counted) in simnet::events::rounds(final_events) {
        if cause == simnet::events::Cause::Add {
            continue;
        }
        ensure!(counted == members + 1, "subnet {subnet} epoch {epoch}: {counted} negotiations for {members} members");
        rounds += 1;
    }
    ensure!(rounds > 5, "only {rounds} full rounds observed");
    Ok(format!("{exchanges} exchanges agree, {rounds} rounds with M+1 negotiations"))
}

fn close(a: f64, b: f64) -> bool {
    ((a - b) / b).abs() <= 1e-9
}

fn criterion_4() -> Outcome {
    let model = CostModel::default();
    let basis = ProposedBasis::AsPrinted;
    for (scheme, t, e) in [
        (SchemeId::Proposed, 70.14, 1683.4),
        (SchemeId::Ibekas, 315.63, 7575.3),
        (SchemeId::BnnIbsKs, 110.16, 2643.84),
    ] {
        let (gt, ge) = time_energy(scheme, 10, &model, basis);
        ensure!(close(gt, t) && close(ge, e), "{} M=10: {gt} s / {ge} mJ", scheme.name());
    }
    let ms: Vec<u64> = (1..=50).collect();
    let csv = render_report(&ReportSpec { ms: ms.clone(), ns: vec![1], schemes: SchemeId::ALL.to_vec(), ..Default::default() });
    let mut series: BTreeMap<String, Vec<(u64, f64, f64)>> = BTreeMap::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let num = |i: usize| f[i].parse::<f64>().map_err(|e| format!("{line}: {e}"));
        series.entry(f[0].to_string()).or_default().push((f[1].parse().unwrap(), num(4)?, num(5)?));
    }
    for (name, rows) in &series {
        ensure!(rows.len() == 50, "{name}: {} rows", rows.len());
        for w in rows.windows(2) {
            ensure!(w[1].1 >= w[0].1 && w[1].2 >= w[0].2, "{name} not monotone at M={}", w[1].0);
        }
    }
    let (p, i) = (&series["Proposed"], &series["IBEKAS"]);
    for (a, b) in p.iter().zip(i) {
        if a.0 >= 4 {
            ensure!(a.1 < b.1 && a.2 < b.2, "Proposed not cheaper than IBEKAS at M={}", a.0);
        } else {
            ensure!(a.1 >= b.1 - 1e-9, "Proposed already cheaper at M={}", a.0);
        }
    }
    Ok("Table II values exact, 3 monotone series, crossover at M=4".into())
}

fn view_json(net: &simnet::NetworkState, k: usize) -> String {
    serde_json::to_string(&net.subnet_view(k).unwrap()).unwrap()
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let (start, after) = golden_states();
    let before = |i: usize| if i == 0 { &start } else { &after[i - 1] };

    // (a)
    let readd = event_index(|e| matches!(e, ScriptEvent::Add { id, .. } if id == "N006"));
    ensure!(
        matches!(after[readd].events().last(), Some(Event::AddRejected { reason: Rejection::Revoked, .. })),
        "(a) revoked N006 was not rejected"
    );
    ensure!(!after[readd].subnet(1).unwrap().members.contains(&"N006".to_string()), "(a) N006 rejoined");

    // (b)
    let add = event_index(|e| matches!(e, ScriptEvent::Add { id, .. } if id == "N100"));
    let head = after[add].subnet(1).unwrap().head.clone();
    let changed: Vec<&String> = after[add].nodes().iter().filter(|(id, rec)| before(add).node(id) != Some(*rec)).map(|(id, _)| id).collect();
    ensure!(
        changed.iter().all(|c| ["N100", head.as_str(), BASE_STATION].contains(&c.as_str())),
        "(b) addition changed {changed:?}"
    );

    // (c)
    let comp = event_index(|e| matches!(e, ScriptEvent::Compromise { .. }));
    let old_head = before(comp).subnet(3).unwrap().head.clone();
    let now = &after[comp];
    let s = now.subnet(3).unwrap();
    let stale = now.node(&old_head).unwrap();
    for (i, m) in s.members.iter().enumerate() {
        let frame = now.send_to_head(m, [i as u8; NONCE_LEN], b"current").map_err(|e| e.to_string())?;
        for key in stale.sessions.values() {
            ensure!(parse_app_message(&frame.open(key)).is_none(), "(c) {old_head} opened a frame from {m}");
        }
    }
    for k in [0, 1, 2, 4] {
        ensure!(view_json(before(comp), k) == view_json(now, k), "(c) subnet {k} changed during recovery");
    }

    // (d)
    let rk = event_index(|e| matches!(e, ScriptEvent::Rekey { .. }));
    let (s0, s1) = (before(rk).subnet(2).unwrap(), after[rk].subnet(2).unwrap());
    let old: Vec<[u8; 32]> = before(rk).node(&s0.head).unwrap().sessions.values().map(|k| *k.key()).collect();
    for k in after[rk].node(&s1.head).unwrap().sessions.values() {
        ensure!(!old.contains(k.key()), "(d) a session key survived the rekey");
    }
    for (i, m) in s0.members.iter().enumerate() {
        let frame = before(rk).send_to_head(m, [i as u8; NONCE_LEN], b"old").map_err(|e| e.to_string())?;
        ensure!(after[rk].head_receive(m, &frame) == Err(SimError::MalformedFrame), "(d) old frame from {m} still opens");
    }

    let t_full = Instant::now();
    simnet::run_scenario(&golden_scenario()).map_err(|e| e.to_string())?;
    within(t_full.elapsed(), 60)?;
    Ok(format!("(a)-(d) hold, full scenario {:.2}s, checks {:.2}s", t_full.elapsed().as_secs_f64(), t.elapsed().as_secs_f64()))
}

fn criterion_6() -> Outcome {
    let mut sensors = 0;
    for (i, subnets) in [2usize, 3, 4, 5, 6, 2, 3, 4, 5, 6].into_iter().enumerate() {
        let range = 2.0 * max_cell_diagonal(subnets);
        let config = SimConfig::with_preset(Preset::Sim64, 20 * subnets, subnets, range);
        let seed = 100 + i as u64;
        let mut net = simnet::init_network(config, seed).map_err(|e| e.to_string())?;
        let a = net.elect_cluster_heads().map_err(|e| e.to_string())?;
        for rec in net.nodes().values().filter(|n| n.role != NodeRole::BaseStation) {
            let k = *a.subnet_of.get(&rec.id).ok_or(format!("seed {seed}: {} unassigned", rec.id))?;
            let head = net.node(&a.heads[k]).unwrap();
            ensure!(distance(rec.position, head.position) <= range, "seed {seed}: {} out of range", rec.id);
            sensors += 1;
        }
        ensure!(net.connectivity_rate() == 1.0, "seed {seed}: rate {}", net.connectivity_rate());
    }
    Ok(format!("10 topologies, {sensors} sensors all in range"))
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("wsnkm").chain(args.iter().copied());
    match wsn_keymgmt::cli::run(argv, &mut out, &mut err) {
        0 => Ok(out),
        code => Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err))),
    }
}

fn criterion_7() -> Outcome {
    let scenario = golden_scenario_path();
    let scenario = scenario.to_str().unwrap();
    let runs: [(&[&str], &str); 4] = [
        (&["ibe-demo", "--seed", "7"], "ibe_demo.txt"),
        (&["negotiate-demo", "--seed", "7"], "negotiate_demo.txt"),
        (&["simulate", "--scenario", scenario], "scenario.log"),
        (&["metrics", "--m", "1..50"], "metrics.csv"),
    ];
    for (args, golden) in runs {
        let a = cli(args)?;
        ensure!(a == cli(args)?, "{args:?} differs between runs");
        check_golden(golden, &String::from_utf8(a).map_err(|e| e.to_string())?)?;
    }
    Ok("4 commands byte-identical across runs and against golden files".into())
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("pairing correctness", criterion_1),
        ("BasicIdent round trip", criterion_2),
        ("negotiation agreement", criterion_3),
        ("cost model", criterion_4),
        ("lifecycle invariants", criterion_5),
        ("connectivity", criterion_6),
        ("determinism", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
