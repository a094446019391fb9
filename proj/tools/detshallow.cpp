#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "detshallow/detshallow.hpp"

using namespace detshallow;

namespace {

struct ApproxArgs {
  std::string matrix, mode = "hermitian", delta = "0.3", param_mode = "practical", dump_circuit, report = "json";
  double epsilon = 1e-3;
  long m0 = 64;
  long precision_bits = 0;
  long rounding_bits = 64;
  double kappa = 0;
  std::uint64_t seed = 0;
  bool verify = false, dump_schedule = false, unsafe = false, no_fallback = false, reduce_depth = false,
       booleanize = false;
};

struct GenArgs {
  std::string cls = "H", delta = "0.3", out;
  std::size_t n = 4;
  std::uint64_t seed = 0;
  long negatives = -1;
};

int run_approx(const ApproxArgs& a) {
  ComplexMatrix A = load_matrix(a.matrix);
  PipelineOptions opt;
  static const std::map<std::string, DetMode> modes{
      {"hermitian", DetMode::Hermitian}, {"hurwitz", DetMode::Hurwitz}, {"abs", DetMode::Abs}};
  opt.mode = modes.at(a.mode);
  opt.param_mode = a.param_mode == "practical" ? ParamMode::Practical : ParamMode::Strict;
  opt.m0 = a.m0;
  if (a.precision_bits > 0) opt.precision_bits = a.precision_bits;
  opt.verify = a.verify;
  opt.unsafe = a.unsafe;
  opt.force_cac = a.no_fallback;
  opt.reduce_depth = a.reduce_depth;
  opt.booleanize = a.booleanize;
  opt.rounding_bits = a.rounding_bits;
  if (a.kappa > 0) opt.kappa = a.kappa;
  mpq_class delta = parse_rational(a.delta);

  if (a.dump_schedule && opt.mode != DetMode::Abs) {
    CacSchedule s = opt.mode == DetMode::Hermitian ? hermitian_schedule(delta) : hurwitz_schedule(delta);
    std::cerr << schedule_dump(s);
  }
  ApproxResult r = approximate_determinant(A, a.epsilon, delta, opt);
  if (!a.dump_circuit.empty()) {
    if (!r.composed) throw PreconditionError("no circuit was built (exact fallback or abs mode)");
    std::ofstream f(a.dump_circuit);
    if (!f) throw InputError("cannot write " + a.dump_circuit);
    write_circuit(f, *r.composed);
  }
  if (a.report == "text")
    std::cout << report_text(r);
  else
    std::cout << report_json(r).dump(2) << '\n';
  return 0;
}

int run_gen(const GenArgs& g) {
  mpq_class delta = parse_rational(g.delta);
  MatrixClass cls = parse_class_tag(g.cls);
  ComplexMatrix m;
  if (cls == MatrixClass::Hermitian && g.negatives >= 0)
    m = generate_hermitian(g.n, delta, g.seed, static_cast<std::size_t>(g.negatives));
  else
    m = generate(cls, g.n, delta, g.seed);
  if (g.out.empty() || g.out == "-")
    write_matrix(std::cout, m);
  else
    save_matrix(g.out, m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate determinants through low-depth arithmetic circuits"};
  app.require_subcommand(1);

  ApproxArgs a;
  auto* approx = app.add_subcommand("approx", "approximate Det(A) for a matrix file");
  approx->add_option("--matrix", a.matrix, "matrix file")->required();
  approx->add_option("--mode", a.mode)->check(CLI::IsMember({"hermitian", "hurwitz", "abs"}));
  approx->add_option("--delta", a.delta, "class parameter (decimal or p/q)");
  approx->add_option("--epsilon", a.epsilon);
  approx->add_option("--param-mode", a.param_mode)->check(CLI::IsMember({"strict", "paper", "practical"}));
  approx->add_option("--m0", a.m0, "derivative budget in practical mode");
  approx->add_option("--precision-bits", a.precision_bits);
  approx->add_flag("--verify", a.verify, "compare with the exact determinant");
  approx->add_option("--dump-circuit", a.dump_circuit, "write the evaluated circuit here");
  approx->add_flag("--dump-schedule", a.dump_schedule, "print the schedule to stderr");
  approx->add_option("--report", a.report)->check(CLI::IsMember({"json", "text"}));
  approx->add_option("--seed", a.seed, "accepted for reproducible scripts; the pipeline is deterministic");
  approx->add_flag("--unsafe", a.unsafe, "skip the class certificate check");
  approx->add_flag("--no-fallback", a.no_fallback, "run the circuit even when k >= n");
  approx->add_flag("--reduce-depth", a.reduce_depth);
  approx->add_flag("--booleanize", a.booleanize, "evaluate in scaled-integer arithmetic");
  approx->add_option("--rounding-bits", a.rounding_bits);
  approx->add_option("--kappa", a.kappa, "condition bound for abs mode (default 1/delta)");

  GenArgs g;
  auto* gen = app.add_subcommand("gen", "generate a certified matrix");
  gen->add_option("--class", g.cls)->check(CLI::IsMember({"H", "S", "psd", "G"}));
  gen->add_option("--n", g.n)->required();
  gen->add_option("--delta", g.delta);
  gen->add_option("--seed", g.seed);
  gen->add_option("--out", g.out);
  gen->add_option("--negatives", g.negatives, "number of negative eigenvalues (class H)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (*approx) return run_approx(a);
    return run_gen(g);
  } catch (const BudgetError& e) {
    std::cerr << "budget exhausted at segment " << e.segment() << ": " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
