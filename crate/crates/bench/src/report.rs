//! Original-vs-rewritten comparisons on the reference evaluator.

use std::time::{Duration, Instant};

use serde::Serialize;
use staticfilter_core::engine::{FilterConfig, Mode};
use staticfilter_core::eval::{evaluate, EvalOptions, FactStore, Model};
use staticfilter_core::filter::{auto_theory, Regime};
use staticfilter_core::rewrite::optimize;
use staticfilter_core::Program;

pub const SCHEMA: &str = "bench-report/v1";

/// One program variant: the original, or a rewriting under `config`.
#[derive(Clone, Debug)]
pub struct Variant {
    pub name: String,
    pub config: Option<FilterConfig>,
}

impl Variant {
    pub fn original() -> Variant {
        Variant {
            name: "original".into(),
            config: None,
        }
    }

    pub fn rewritten(mode: Mode, regime: Regime, regime_name: &str) -> Variant {
        let m = match mode {
            Mode::Full => "full",
            Mode::Casf => "casf",
        };
        Variant {
            name: format!("{m}/{regime_name}"),
            config: Some(FilterConfig::new(mode, regime)),
        }
    }

    /// The original plus both modes under the propositional regime and the
    /// auto order theory.
    pub fn standard(program: &Program) -> Vec<Variant> {
        let horn = Regime::horn(auto_theory(program));
        vec![
            Variant::original(),
            Variant::rewritten(Mode::Full, Regime::prop(), "prop"),
            Variant::rewritten(Mode::Full, horn.clone(), "horn"),
            Variant::rewritten(Mode::Casf, Regime::prop(), "prop"),
            Variant::rewritten(Mode::Casf, horn, "horn"),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonOptions {
    pub name: String,
    pub seed: Option<u64>,
    /// timed repetitions; the report keeps the median
    pub runs: usize,
    pub eval: EvalOptions,
}

impl Default for ComparisonOptions {
    fn default() -> Self {
        ComparisonOptions {
            name: String::new(),
            seed: None,
            runs: 5,
            eval: EvalOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct VariantReport {
    pub variant: String,
    pub rules: usize,
    pub facts_derived: Option<usize>,
    pub output_facts: Option<usize>,
    pub firings: Option<u64>,
    pub eval_ms_median: Option<f64>,
    pub rewrite_ms: Option<f64>,
    pub iteration_count: Option<u64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct BenchReport {
    pub schema: String,
    pub name: String,
    pub seed: Option<u64>,
    pub input_facts: usize,
    pub runs: usize,
    pub variants: Vec<VariantReport>,
}

impl BenchReport {
    pub fn variant(&self, name: &str) -> Option<&VariantReport> {
        self.variants.iter().find(|v| v.variant == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// A single report as an object, several as an array.
pub fn reports_to_json(reports: &[BenchReport]) -> String {
    match reports {
        [one] => one.to_json(),
        many => serde_json::to_string_pretty(many).expect("reports serialize"),
    }
}

pub fn median(mut xs: Vec<Duration>) -> Duration {
    if xs.is_empty() {
        return Duration::ZERO;
    }
    xs.sort();
    xs[xs.len() / 2]
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

/// Evaluates `runs` times and returns the last model with the median time.
pub fn timed_eval(
    program: &Program,
    store: &FactStore,
    opts: &EvalOptions,
    runs: usize,
) -> Result<(Model, Duration), String> {
    let mut times = Vec::new();
    let mut model = None;
    for _ in 0..runs.max(1) {
        let t = Instant::now();
        let m = evaluate(program, store, opts).map_err(|e| e.to_string())?;
        times.push(t.elapsed());
        model = Some(m);
    }
    Ok((model.unwrap(), median(times)))
}

/// Rewrites and evaluates each variant. Rewriting and evaluation errors are
/// recorded in the variant's report.
pub fn run_comparison(
    program: &Program,
    store: &FactStore,
    variants: &[Variant],
    opts: &ComparisonOptions,
) -> BenchReport {
    let input = store.with_program_facts(program).len();
    let mut out = Vec::new();
    for v in variants {
        let mut r = VariantReport {
            variant: v.name.clone(),
            rules: program.rules.len(),
            facts_derived: None,
            output_facts: None,
            firings: None,
            eval_ms_median: None,
            rewrite_ms: None,
            iteration_count: None,
            error: None,
        };
        let prog = match &v.config {
            None => program.clone(),
            Some(cfg) => {
                let mut times = Vec::new();
                let mut result = None;
                for _ in 0..opts.runs.max(1) {
                    let t = Instant::now();
                    let o = optimize(program, cfg);
                    times.push(t.elapsed());
                    result = Some(o);
                }
                match result.unwrap() {
                    Ok(o) => {
                        r.rewrite_ms = Some(ms(median(times)));
                        r.iteration_count = Some(o.assignment.iteration_count);
                        r.rules = o.rewritten.rules.len();
                        o.rewritten
                    }
                    Err(e) => {
                        r.error = Some(e.to_string());
                        out.push(r);
                        continue;
                    }
                }
            }
        };
        match timed_eval(&prog, store, &opts.eval, opts.runs) {
            Ok((m, t)) => {
                r.facts_derived = Some(m.facts.len() - input);
                r.output_facts = Some(m.outputs(program).len());
                r.firings = Some(m.total_firings());
                r.eval_ms_median = Some(ms(t));
            }
            Err(e) => r.error = Some(e),
        }
        out.push(r);
    }
    BenchReport {
        schema: SCHEMA.into(),
        name: opts.name.clone(),
        seed: opts.seed,
        input_facts: input,
        runs: opts.runs.max(1),
        variants: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use staticfilter_core::families::{gen_bounded_reach, gen_counter};
    use staticfilter_core::Const;

    fn one_run() -> ComparisonOptions {
        ComparisonOptions {
            runs: 1,
            ..ComparisonOptions::default()
        }
    }

    #[test]
    fn counter_gap_at_width_ten() {
        let f = gen_counter(10).unwrap();
        let variants = [
            Variant::original(),
            Variant::rewritten(Mode::Casf, Regime::prop(), "prop"),
        ];
        let r = run_comparison(&f.program, &f.facts, &variants, &one_run());
        let (orig, new) = (
            r.variant("original").unwrap(),
            r.variant("casf/prop").unwrap(),
        );
        // 2^10 - 1 increments from the a-seed, one from the b-seed, and the
        // out rule on the two b-facts; the rewriting keeps one increment
        assert_eq!(orig.firings, Some(1024 + 2));
        assert_eq!(new.firings, Some(1 + 2));
        assert!(orig.facts_derived.unwrap() >= new.facts_derived.unwrap() * 512);
        assert_eq!(r.variants[0].output_facts, r.variants[1].output_facts);
    }

    #[test]
    fn identical_variants_agree() {
        let f = gen_counter(4).unwrap();
        let r = run_comparison(
            &f.program,
            &f.facts,
            &[Variant::original(), Variant::original()],
            &one_run(),
        );
        assert_eq!(r.variants[0].facts_derived, r.variants[1].facts_derived);
        assert_eq!(r.variants[0].firings, r.variants[1].firings);
    }

    #[test]
    fn cap_errors_are_reported() {
        let cyc = crate::graph::cycle(3);
        let f = gen_bounded_reach(5, &Const::sym("n0"), &cyc).unwrap();
        let opts = ComparisonOptions {
            eval: EvalOptions::default().with_max_rounds(Some(100)),
            ..one_run()
        };
        let r = run_comparison(&f.program, &f.facts, &Variant::standard(&f.program), &opts);
        assert!(r
            .variant("original")
            .unwrap()
            .error
            .as_deref()
            .unwrap()
            .contains("non-terminating under cap"));
        let horn = r.variant("full/horn").unwrap();
        assert!(horn.error.is_none());
        assert_eq!(horn.output_facts, Some(3));
    }

    #[test]
    fn json_has_schema_and_seed() {
        let f = gen_counter(2).unwrap();
        let opts = ComparisonOptions {
            seed: Some(42),
            name: "counter".into(),
            ..one_run()
        };
        let json = run_comparison(&f.program, &f.facts, &[Variant::original()], &opts).to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["schema"], "bench-report/v1");
        assert_eq!(v["seed"], 42);
        assert_eq!(v["variants"][0]["variant"], "original");
    }
}
