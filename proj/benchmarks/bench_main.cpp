#include <benchmark/benchmark.h>

// The distribution's libbenchmark_main.a carries LTO bytecode from another
// compiler release, so main is defined here.
BENCHMARK_MAIN();
