#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lab_commands.hpp"

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    out.push_back(std::stod(item, &used));
    if (used != item.size()) throw twicing::DomainError("bad number in list: '" + item + "'");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace twicing;
  using namespace twicing::lab;

  CLI::App app{"Numerical laboratory for twicing attention and NLM smoothing operators"};
  app.require_subcommand(1);

  EigencapacityOptions eig;
  auto* eig_cmd = app.add_subcommand("eigencapacity", "closed-form and quadrature eigencapacities");
  eig_cmd->add_option("--nmax", eig.n_max, "largest step count")->check(CLI::PositiveNumber);
  eig_cmd->add_option("--nodes", eig.nodes, "minimum quadrature nodes")->check(CLI::Range(32, 1 << 20));
  eig_cmd->add_option("--out", eig.out, "output CSV");
  std::uint64_t eig_seed = 0;
  eig_cmd->add_option("--seed", eig_seed, "unused; accepted for uniformity");

  DenoiseOptions den;
  std::string den_mode = "twicing";
  auto* den_cmd = app.add_subcommand("denoise", "iterated NLM denoising, plain vs twicing");
  den_cmd->add_option("--image", den.image, "input PGM (P2 or P5)");
  den_cmd->add_option("--signal", den.signal, "input 1-D signal, single-column CSV");
  den_cmd->add_option("--noise-sigma", den.noise_sigma, "std. dev. of added gaussian noise");
  den_cmd->add_option("--steps", den.steps, "filtering steps")->check(CLI::PositiveNumber);
  den_cmd->add_option("--mode", den_mode, "plain | standard | twicing")
      ->check(CLI::IsMember({"plain", "standard", "twicing"}));
  den_cmd->add_option("--bandwidth", den.bandwidth, "patch affinity bandwidth");
  den_cmd->add_option("--patch-radius", den.patch_radius, "patch radius in samples");
  den_cmd->add_option("--lambda", den.lambda, "fidelity weight (plain mode)");
  den_cmd->add_option("--seed", den.seed, "noise seed");
  den_cmd->add_option("--out", den.out, "output prefix");

  CollapseOptions col;
  auto* col_cmd = app.add_subcommand("collapse", "token cosine similarity across attention layers");
  col_cmd->add_option("--layers", col.stack.layers)->check(CLI::PositiveNumber);
  col_cmd->add_option("--tokens", col.stack.tokens)->check(CLI::Range(2, 1 << 16));
  col_cmd->add_option("--dim", col.stack.input_dim, "token width D_x")->check(CLI::PositiveNumber);
  col_cmd->add_option("--head-dim", col.stack.head_dim, "query/key width D")->check(CLI::PositiveNumber);
  col_cmd->add_option("--weight-scale", col.stack.weight_scale)->check(CLI::PositiveNumber);
  col_cmd->add_option("--seeds", col.seeds, "number of seeds")->check(CLI::PositiveNumber);
  col_cmd->add_option("--seed", col.stack.seed, "first seed");
  col_cmd->add_option("--out", col.out, "output CSV");
  std::string col_mode;
  col_cmd->add_option("--mode", col_mode, "ignored; both modes always run");

  NwBiasOptions nwb;
  std::string h_list;
  std::string kernel = "gaussian";
  auto* nwb_cmd = app.add_subcommand("nwbias", "Nadaraya-Watson bias order, plain vs twiced kernel");
  nwb_cmd->add_option("--h-list", h_list, "comma-separated bandwidths");
  nwb_cmd->add_option("--bandwidth", h_list, "alias of --h-list");
  nwb_cmd->add_option("--kernel", kernel)->check(CLI::IsMember({"gaussian", "box", "triangle", "tabulated"}));
  nwb_cmd->add_flag("--linear", nwb.linear_target, "use a linear target instead of sin(2πx)");
  nwb_cmd->add_option("--x0", nwb.x0, "evaluation point");
  nwb_cmd->add_option("--design-size", nwb.design_size, "grid points on [0, 1]");
  nwb_cmd->add_option("--out", nwb.out, "output CSV");
  std::uint64_t nwb_seed = 0;
  nwb_cmd->add_option("--seed", nwb_seed, "unused; the design is noiseless");

  GradcheckOptions grd;
  auto* grd_cmd = app.add_subcommand("gradcheck", "finite-difference checks of analytic gradients");
  grd_cmd->add_option("--seed", grd.seed);
  grd_cmd->add_option("--out", grd.out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "twicing_lab: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*eig_cmd) {
      write_text(eig.out, eigencapacity_csv(eig));
    } else if (*den_cmd) {
      den.mode = denoise_mode_from_string(den_mode);
      write_denoise(den, run_denoise(den));
    } else if (*col_cmd) {
      ComparisonSummary s;
      write_text(col.out, collapse_csv(col, &s));
      std::cout << "wins=" << s.wins << " ties=" << s.ties << " losses=" << s.losses
                << " mean_final_gap=" << format_double(s.mean_final_gap) << "\n";
    } else if (*nwb_cmd) {
      if (!h_list.empty()) nwb.bandwidths = parse_list(h_list);
      nwb.kernel = kernel_family_from_string(kernel);
      const auto r = run_nwbias(nwb);
      write_text(nwb.out, nwbias_csv(nwb, r));
      std::cout << "slope_plain=" << format_double(r.plain.slope)
                << " slope_twiced=" << format_double(r.twiced.slope) << "\n";
    } else if (*grd_cmd) {
      bool ok = false;
      write_text(grd.out, gradcheck_csv(grd, &ok));
      if (!ok) {
        std::cerr << "gradcheck: a block exceeded relative error " << kGradcheckThreshold << "\n";
        return 3;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "twicing_lab: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
