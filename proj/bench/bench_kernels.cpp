// Serial vs OpenMP per-shift kernels on the desk-scale geometry and a larger one.
// Arguments: {n, m}; tau = m/2, perturbed separable scan, os = 2.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "ptycho/recon.hpp"
#include "ptycho/synth.hpp"

using namespace ptycho;

namespace {

struct Setup {
    GridGeometry geom;
    ScanPattern pattern;
    ComplexImage object, probe;
    FrameOperator op;
    std::vector<Complex> x;
    FrameStack y;

    Setup(int n, int m)
        : geom(n, m),
          pattern(perturbed_separable(n, m / 2, random_separable_delta(2 * n / m, 2, 1),
                                      random_separable_delta(2 * n / m, 2, 2))),
          object(synthetic_object("cib_like", n, 1)),
          probe(random_phase_probe(m, 8)),
          op(object_operator(ReconCanvas(geom, pattern.shifts()), probe, pattern.shifts(), 2, 1e-8, false)),
          x(object.begin(), object.end()),
          y(op.frame_count(), op.frame_side())
    {
        kernels::forward_frames_serial(op.layout(), x, y);
    }
};

void forward(benchmark::State& st, Exec e)
{
    Setup s(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    FrameStack out(s.op.frame_count(), s.op.frame_side());
    for (auto _ : st) {
        kernels::forward_frames(e, s.op.layout(), s.x, out);
        benchmark::DoNotOptimize(out.raw().data());
    }
    st.counters["frames"] = s.op.frame_count();
    st.counters["threads"] = e == Exec::serial ? 1 : omp_get_max_threads();
}

void adjoint(benchmark::State& st, Exec e)
{
    Setup s(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    std::vector<Complex> out(s.x.size());
    for (auto _ : st) {
        kernels::adjoint_frames(e, s.op.layout(), s.y, out);
        benchmark::DoNotOptimize(out.data());
    }
    st.counters["threads"] = e == Exec::serial ? 1 : omp_get_max_threads();
}

void measure_all(benchmark::State& st, Exec e)
{
    Setup s(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
    for (auto _ : st) benchmark::DoNotOptimize(measure(s.object, s.probe, s.geom, s.pattern, 2, e));
}

void sizes(benchmark::internal::Benchmark* b)
{
    b->Args({64, 16})->Args({128, 32})->Unit(benchmark::kMicrosecond);
}

} // namespace

BENCHMARK_CAPTURE(forward, serial, Exec::serial)->Apply(sizes);
BENCHMARK_CAPTURE(forward, parallel, Exec::parallel)->Apply(sizes);
BENCHMARK_CAPTURE(adjoint, serial, Exec::serial)->Apply(sizes);
BENCHMARK_CAPTURE(adjoint, parallel, Exec::parallel)->Apply(sizes);
BENCHMARK_CAPTURE(measure_all, serial, Exec::serial)->Apply(sizes);
BENCHMARK_CAPTURE(measure_all, parallel, Exec::parallel)->Apply(sizes);

BENCHMARK_MAIN();
