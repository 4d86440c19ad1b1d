// Command-line front end: single reduced or full elements, R-grid tables,
// Fourier-space elements and the verification suite.
//
// Exit codes: 0 success, 1 computation or I/O failure, 2 usage or domain error.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpgreen/errors.hpp"
#include "mpgreen/multipole_core.hpp"
#include "mpgreen/verify.hpp"

namespace {

using namespace mpgreen;
using json = nlohmann::ordered_json;

constexpr const char* kVersion = "1.0.0";
constexpr const char* kWorkersEnv = "MPGREEN_WORKERS";

struct Record {
  int l = 0;
  std::optional<int> m;
  int lp = 0;
  std::optional<int> mp;
  std::optional<int> j;
  std::optional<double> R;
  std::optional<Vec3> k;
  double a = 1.0;
  std::string regime;
  double value_re = 0.0;
  double value_im = 0.0;
};

std::string fmt(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

template <class T>
std::string opt_str(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_same_v<T, int>)
    return std::to_string(*v);
  else
    return fmt(*v);
}

void write_csv(std::ostream& os, const std::vector<Record>& recs) {
  os << "l,m,lp,mp,j,R,a,regime,value_re,value_im\n";
  for (const auto& r : recs) {
    // Fourier records carry |k| in the R column.
    const std::optional<double> radial = r.k ? std::optional<double>(norm(*r.k)) : r.R;
    os << r.l << ',' << opt_str(r.m) << ',' << r.lp << ',' << opt_str(r.mp) << ',' << opt_str(r.j)
       << ',' << opt_str(radial) << ',' << fmt(r.a) << ',' << r.regime << ',' << fmt(r.value_re)
       << ',' << fmt(r.value_im) << '\n';
  }
}

json num(double x) { return x == 0.0 ? json(0.0) : json(x); }

void write_json(std::ostream& os, const std::vector<Record>& recs, const std::string& command,
                const std::map<std::string, std::string>& flags) {
  json out;
  out["records"] = json::array();
  for (const auto& r : recs) {
    json o;
    o["l"] = r.l;
    o["m"] = r.m ? json(*r.m) : json(nullptr);
    o["lp"] = r.lp;
    o["mp"] = r.mp ? json(*r.mp) : json(nullptr);
    o["j"] = r.j ? json(*r.j) : json(nullptr);
    if (r.k) {
      o["kx"] = num((*r.k)[0]);
      o["ky"] = num((*r.k)[1]);
      o["kz"] = num((*r.k)[2]);
    } else {
      o["R"] = num(r.R.value_or(0.0));
    }
    o["a"] = num(r.a);
    o["regime"] = r.regime;
    o["value_re"] = num(r.value_re);
    o["value_im"] = num(r.value_im);
    out["records"].push_back(o);
  }
  json f = json::object();
  for (const auto& [k, v] : flags) f[k] = v;
  out["meta"] = {{"version", kVersion}, {"command", command}, {"flags", f}};
  os << out.dump(2) << '\n';
}

Vec3 parse_vec3(const std::string& s, const char* what) {
  Vec3 v{};
  std::stringstream ss(s);
  ss.imbue(std::locale::classic());
  std::string item;
  int n = 0;
  while (std::getline(ss, item, ',')) {
    if (n >= 3) break;
    const char* b = item.data();
    const char* e = b + item.size();
    auto res = std::from_chars(b, e, v[n]);
    if (res.ec != std::errc() || res.ptr != e)
      throw DomainError(std::string(what) + " component '" + item + "' is not a number");
    ++n;
  }
  if (n != 3 || ss.rdbuf()->in_avail() > 0)
    throw DomainError(std::string(what) + " must be three comma-separated numbers");
  return v;
}

int workers_from_env() {
  const char* s = std::getenv(kWorkersEnv);
  if (!s || !*s) return 0;
  int n = 0;
  auto res = std::from_chars(s, s + std::strlen(s), n);
  if (res.ec != std::errc() || n < 1)
    throw DomainError(std::string(kWorkersEnv) + " must be a positive integer");
  return n;
}

struct Emitter {
  std::string format = "csv";
  std::string out_path;
  std::string command;
  std::map<std::string, std::string> flags;

  void emit(const std::vector<Record>& recs) const {
    std::ostringstream os;
    if (format == "json")
      write_json(os, recs, command, flags);
    else
      write_csv(os, recs);
    if (out_path.empty() || out_path == "-") {
      std::cout << os.str();
      std::cout.flush();
      if (!std::cout) throw Error("failed writing to standard output");
      return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw Error("cannot open output file '" + out_path + "'");
    f << os.str();
    f.close();
    if (!f) throw Error("failed writing output file '" + out_path + "'");
  }
};

void collect_flags(const CLI::App* sub, std::map<std::string, std::string>& flags) {
  for (const CLI::Option* o : sub->get_options()) {
    if (o->get_name() == "--help" || o->count() == 0) continue;
    std::string name = o->get_name();
    while (!name.empty() && name.front() == '-') name.erase(name.begin());
    std::string joined;
    for (const auto& r : o->results()) joined += (joined.empty() ? "" : ",") + r;
    flags[name] = joined;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multipole matrix elements of the Laplace Green function for two equal spheres"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string format = "csv";
  auto add_format = [&](CLI::App* s) {
    s->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };

  // reduced
  int l = 0, m = 0, lp = 0, mp = 0, j = 0;
  double R = 0.0, radius = 1.0;
  auto* reduced = app.add_subcommand("reduced", "Reduced element g^j_{l,l'}(R)");
  reduced->add_option("--l", l)->required();
  reduced->add_option("--lp", lp)->required();
  reduced->add_option("--j", j)->required();
  reduced->add_option("--R", R, "Center separation")->required();
  reduced->add_option("--radius", radius, "Sphere radius a");
  add_format(reduced);

  // element
  std::string rvec_s;
  double rx = 0, ry = 0, rz = 0;
  auto* element = app.add_subcommand("element", "Matrix element G_{lm,l'm'} at separation R");
  element->add_option("--l", l)->required();
  element->add_option("--m", m)->required();
  element->add_option("--lp", lp)->required();
  element->add_option("--mp", mp)->required();
  auto* rvec_opt = element->add_option("--R", rvec_s, "Separation x,y,z");
  auto* rx_opt = element->add_option("--Rx", rx);
  auto* ry_opt = element->add_option("--Ry", ry);
  auto* rz_opt = element->add_option("--Rz", rz);
  rvec_opt->excludes(rx_opt)->excludes(ry_opt)->excludes(rz_opt);
  element->add_option("--radius", radius);
  add_format(element);

  // table
  int lmax = 1, r_count = 2;
  double r_start = 0.0, r_stop = 4.0;
  std::string out_path;
  auto* table = app.add_subcommand("table", "Every admissible reduced element on a uniform R grid");
  table->add_option("--lmax", lmax)->required();
  table->add_option("--R-start", r_start)->required();
  table->add_option("--R-stop", r_stop)->required();
  table->add_option("--R-count", r_count)->required();
  table->add_option("--radius", radius);
  table->add_option("--out", out_path, "Output file (default stdout)");
  add_format(table);

  // fourier
  std::string kvec_s;
  double kx = 0, ky = 0, kz = 0;
  bool debug = false;
  auto* fourier = app.add_subcommand("fourier", "Fourier-space matrix element at wave vector k");
  fourier->add_option("--l", l)->required();
  fourier->add_option("--m", m)->required();
  fourier->add_option("--lp", lp)->required();
  fourier->add_option("--mp", mp)->required();
  auto* kvec_opt = fourier->add_option("--k", kvec_s, "Wave vector x,y,z");
  auto* kx_opt = fourier->add_option("--kx", kx);
  auto* ky_opt = fourier->add_option("--ky", ky);
  auto* kz_opt = fourier->add_option("--kz", kz);
  kvec_opt->excludes(kx_opt)->excludes(ky_opt)->excludes(kz_opt);
  fourier->add_option("--radius", radius);
  fourier->add_flag("--debug", debug, "Also print the two single-sphere transforms to stderr");
  add_format(fourier);

  // verify
  double tol = 1e-4;
  unsigned long long seed = 1;
  auto* verify = app.add_subcommand("verify", "Run the invariant and oracle suite");
  verify->add_option("--lmax", lmax, "Largest multipole order (0..4)")->default_val(2);
  verify->add_option("--tol", tol, "Tolerance applied to every check")->default_val(1e-4);
  verify->add_option("--seed", seed, "Seed for the random samples")->default_val(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Emitter em;
    em.format = format;
    CLI::App* sub = app.get_subcommands().front();
    em.command = sub->get_name();
    collect_flags(sub, em.flags);

    if (sub == reduced) {
      const ReducedElement e = g_reduced({l, lp, j}, R, radius);
      Record r;
      r.l = l;
      r.lp = lp;
      r.j = j;
      r.R = R;
      r.a = radius;
      r.regime = to_string(e.regime);
      r.value_re = e.value;
      em.emit({r});
    } else if (sub == element) {
      SphereGeometry g;
      g.a = radius;
      g.separation = rvec_opt->count() ? parse_vec3(rvec_s, "--R") : Vec3{rx, ry, rz};
      const Complex v = matrix_element({l, m}, {lp, mp}, g);
      Record r;
      r.l = l;
      r.m = m;
      r.lp = lp;
      r.mp = mp;
      r.R = g.distance();
      r.a = radius;
      r.regime = to_string(regime_of(g.distance(), radius));
      r.value_re = v.real();
      r.value_im = v.imag();
      em.emit({r});
    } else if (sub == table) {
      if (r_count < 2) throw DomainError("--R-count must be >= 2");
      if (!(r_start >= 0.0) || !(r_stop >= r_start))
        throw DomainError("need 0 <= --R-start <= --R-stop");
      std::vector<double> radii(r_count);
      for (int i = 0; i < r_count; ++i)
        radii[i] = i + 1 == r_count ? r_stop : r_start + (r_stop - r_start) * i / (r_count - 1);
      const auto rows = reduced_table(lmax, radii, radius, workers_from_env());
      std::vector<Record> recs;
      recs.reserve(rows.size());
      for (const auto& row : rows) {
        Record r;
        r.l = row.index.l;
        r.lp = row.index.lp;
        r.j = row.index.j;
        r.R = row.R;
        r.a = row.a;
        r.regime = to_string(row.regime);
        r.value_re = row.value;
        recs.push_back(r);
      }
      em.out_path = out_path;
      em.emit(recs);
    } else if (sub == fourier) {
      const Vec3 k = kvec_opt->count() ? parse_vec3(kvec_s, "--k") : Vec3{kx, ky, kz};
      const Complex v = fourier_matrix_element({l, m}, {lp, mp}, k, radius);
      if (debug) {
        const Complex w1 = omega_hat({l, m}, k, radius), w2 = omega_hat({lp, mp}, k, radius);
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        const Complex prod = std::conj(w1) * w2 / k2;
        std::cerr << "omega_hat(l,m) = " << fmt(w1.real()) << " " << fmt(w1.imag()) << "i\n"
                  << "omega_hat(lp,mp) = " << fmt(w2.real()) << " " << fmt(w2.imag()) << "i\n"
                  << "conj(omega)*omega'/k^2 = " << fmt(prod.real()) << " " << fmt(prod.imag())
                  << "i\n";
      }
      Record r;
      r.l = l;
      r.m = m;
      r.lp = lp;
      r.mp = mp;
      r.k = k;
      r.a = radius;
      r.regime = "fourier";
      r.value_re = v.real();
      r.value_im = v.imag();
      em.emit({r});
    } else if (sub == verify) {
      VerifyOptions vo;
      vo.lmax = lmax;
      vo.tol = tol;
      vo.seed = seed;
      vo.workers = workers_from_env();
      const VerifyReport rep = run_verify(vo);
      std::cout << rep.text();
      return rep.all_passed() ? 0 : 1;
    }
    return 0;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
