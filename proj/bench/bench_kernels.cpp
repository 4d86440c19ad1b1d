// Serial reference vs OpenMP kernels: wall time and bit-identity of results.
//
//   bench_kernels [lmax] [grid points] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include <omp.h>

#include "mpgreen/multipole_core.hpp"
#include "mpgreen/oracle_quadrature.hpp"

namespace {

template <class F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt < best) best = dt;
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-22s serial %9.4f s  parallel %9.4f s  speedup %5.2fx  %s\n", name, serial,
              parallel, serial / parallel, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mpgreen;
  const int lmax = argc > 1 ? std::atoi(argv[1]) : 4;
  const int points = argc > 2 ? std::atoi(argv[2]) : 64;
  const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;
  std::printf("threads: %d\n", omp_get_max_threads());

  std::vector<double> radii(points);
  for (int i = 0; i < points; ++i) radii[i] = 4.0 * i / (points - 1);

  std::vector<TableRow> ts, tp;
  const double t_serial = best_of(repeats, [&] { ts = reduced_table_serial(lmax, radii, 1.0); });
  const double t_par = best_of(repeats, [&] { tp = reduced_table(lmax, radii, 1.0); });
  bool same = ts.size() == tp.size();
  for (size_t i = 0; same && i < ts.size(); ++i) same = ts[i].value == tp[i].value;
  report("reduced_table", t_serial, t_par, same);

  const SphereGeometry geom = SphereGeometry::spherical(1.3, 0.6, 0.2, 1.0);
  std::vector<Complex> bs, bp;
  const double b_serial = best_of(repeats, [&] { bs = matrix_block_serial(lmax, geom); });
  const double b_par = best_of(repeats, [&] { bp = matrix_block(lmax, geom); });
  report("matrix_block", b_serial, b_par, bs == bp);

  QuadratureSpec spec;
  spec.node_count = 16;
  const int qlmax = lmax < 2 ? lmax : 2;
  SurfaceQuadrature qs, qp;
  const double q_serial =
      best_of(1, [&] { qs = defining_integral_block_serial(qlmax, geom, spec); });
  const double q_par = best_of(1, [&] { qp = defining_integral_block(qlmax, geom, spec); });
  report("surface_quadrature", q_serial, q_par, qs.values == qp.values);
  return 0;
}
