use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pprog_core::evaluator::{evaluate_contexts, EvalMode};
use pprog_core::frontend::{self, ValidatedProgram};
use pprog_core::pipeline::{analyze_batch, AnalysisOptions};
use pprog_core::Execution;

/// A chain of `n` contexts over `(X{i}, X{i+1})`, which is acyclic.
fn chain_program(n: usize) -> ValidatedProgram {
    let mut src = String::new();
    for i in 0..n {
        src.push_str(&format!(
            "var P{i} = context() {{ var X{i} = flip(0.5) var X{j} = X{i} ? flip(0.7) : flip(0.3) var p = [X{i}, X{j}] \
             return {{Infer({{samples:1000}}, p)}} }};\n",
            j = i + 1
        ));
    }
    let names: Vec<String> = (0..n).map(|i| format!("P{i}")).collect();
    src.push_str(&format!("return {{model({})}}", names.join(", ")));
    frontend::load(&src).expect("generated program is valid")
}

fn fixtures() -> Vec<ValidatedProgram> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    ["coins_acyclic.pp", "order_effects.pp", "bell_no_signal.pp", "bell_signal.pp"]
        .iter()
        .map(|f| frontend::load(&std::fs::read_to_string(format!("{dir}/{f}")).unwrap()).unwrap())
        .collect()
}

fn sampled_contexts(c: &mut Criterion) {
    let program = chain_program(32);
    let contexts = program.program().model_contexts();
    let mode = EvalMode::Sampled { samples: Some(20_000), seed: 1 };
    let mut group = c.benchmark_group("evaluate_sampled_32_contexts");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| evaluate_contexts(&contexts, mode, exec))
        });
    }
    group.finish();
}

fn batch_analysis(c: &mut Criterion) {
    let programs: Vec<ValidatedProgram> = fixtures().into_iter().cycle().take(64).collect();
    let options = AnalysisOptions { execution: Execution::Sequential, ..Default::default() };
    let mut group = c.benchmark_group("analyze_batch_64_programs");
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| analyze_batch(&programs, &options, exec))
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = sampled_contexts, batch_analysis
}
criterion_main!(benches);
