// Serial reference vs OpenMP kernels at item-catalogue sizes.
//   ./kernels_bench --benchmark_filter=score

#include <benchmark/benchmark.h>

#include <random>

#include "incgraph/kernels.hpp"

namespace k = incgraph::kernels;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(Eigen::Index m, Eigen::Index n) {
  std::mt19937_64 gen(42);
  std::normal_distribution<double> d;
  MatrixXd a(m, n);
  for (Eigen::Index j = 0; j < a.size(); ++j) a.data()[j] = d(gen);
  return a;
}

template <MatrixXd (*Fn)(const MatrixXd&, const VectorXd&, const Eigen::Ref<const MatrixXd>&)>
void BM_rotate(benchmark::State& state) {
  const auto rows = state.range(0), rank = state.range(1);
  const MatrixXd basis = random_matrix(rows, rank);
  const VectorXd extra = random_matrix(rows, 1).col(0);
  const MatrixXd rot = random_matrix(rank + 1, rank);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(basis, extra, rot));
  state.SetItemsProcessed(state.iterations() * rows);
}

template <MatrixXd (*Fn)(const MatrixXd&, const MatrixXd&)>
void BM_gram(benchmark::State& state) {
  const auto rows = state.range(0), rank = state.range(1);
  const MatrixXd a = random_matrix(rows, rank), b = random_matrix(rows, rank);
  for (auto _ : state) benchmark::DoNotOptimize(Fn(a, b));
  state.SetItemsProcessed(state.iterations() * rows);
}

template <VectorXd (*Fn)(const MatrixXd&, const VectorXd&, const VectorXd&)>
void BM_score(benchmark::State& state) {
  const auto rows = state.range(0), width = state.range(1);
  const MatrixXd items = random_matrix(rows, width);
  const VectorXd q = random_matrix(width, 1).col(0);
  const VectorXd mult = random_matrix(rows, 1).col(0).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(Fn(items, q, mult));
  state.SetItemsProcessed(state.iterations() * rows);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (long rows : {1000L, 10000L, 100000L})
    for (long rank : {8L, 64L}) b->Args({rows, rank});
}

}  // namespace

BENCHMARK(BM_rotate<k::serial::rotate_basis>)->Name("rotate_basis/serial")->Apply(sizes);
BENCHMARK(BM_rotate<k::parallel::rotate_basis>)->Name("rotate_basis/parallel")->Apply(sizes);
BENCHMARK(BM_gram<k::serial::cross_gram>)->Name("cross_gram/serial")->Apply(sizes);
BENCHMARK(BM_gram<k::parallel::cross_gram>)->Name("cross_gram/parallel")->Apply(sizes);
BENCHMARK(BM_score<k::serial::score_rows>)->Name("score_rows/serial")->Apply(sizes);
BENCHMARK(BM_score<k::parallel::score_rows>)->Name("score_rows/parallel")->Apply(sizes);

BENCHMARK_MAIN();
