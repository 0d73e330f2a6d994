#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "jetvar/cli.hpp"
#include "jetvar/oracle.hpp"

int main(int argc, char** argv) {
  using namespace jetvar;
  CLI::App app{"Symbolic variational calculus on jet bundles"};
  app.require_subcommand(1, 1);

  std::string format = "plain";
  std::optional<std::uint64_t> seed;
  double tol = 1e-9;
  std::optional<int> order_cap;
  std::optional<std::string> bind, field;
  std::string path;

  for (const auto& name : cli::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("problem", path, "problem file")->required();
    sub->add_option("--format", format, "plain, latex or tree")->check(CLI::IsMember({"plain", "latex", "tree"}));
    sub->add_option("--seed", seed, "sampling seed (default: $JETVAR_SEED or built in)");
    sub->add_option("--tol", tol, "relative tolerance of numeric identity tests");
    sub->add_option("--order-cap", order_cap, "highest jet order that may be named");
    sub->add_option("--bind", bind, "named binding from the problem file");
    sub->add_option("--field", field, "named vector field from the problem file");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << path << ": error: cannot open file\n";
    return 2;
  }
  std::stringstream text;
  text << in.rdbuf();

  auto parsed = cli::parse_problem(text.str(), order_cap);
  if (parsed.error) {
    std::cerr << parsed.error->render(path) << "\n";
    return 2;
  }

  cli::Options options;
  options.format = format == "latex" ? Format::Latex : format == "tree" ? Format::Tree : Format::Plain;
  options.seed = seed ? *seed : seed_from_environment(options.seed);
  options.tol = tol;
  options.bind = bind;
  options.field = field;

  auto outcome = cli::run(app.get_subcommands().front()->get_name(), *parsed.problem, options);
  std::cout << outcome.out;
  std::cerr << outcome.err;
  return outcome.code;
}
