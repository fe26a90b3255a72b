#include <string>

#include <CLI11.hpp>

#include "biot/kernels.hpp"
#include "biot/scenario.hpp"

// biotade: solvers for the dynamic Biot-Allard poroelasticity model with
// the memory kernel realized by auxiliary differential equations, plus the
// fitting and well-posedness tooling around them.

int main(int argc, char** argv) {
  CLI::App app{"biotade - convolution-free Biot-Allard solvers and analysis tools"};
  app.require_subcommand(1);

  std::string config;
  std::string out = "out";
  bool quiet = false;
  std::string simd;
  app.add_option("--simd", simd, "force SIMD lane: scalar, avx2 or neon");

  struct Sub {
    const char* name;
    const char* mode;
    const char* help;
  };
  const Sub subs[] = {
      {"fit", "fit", "fit a rational permeability series to frequency samples"},
      {"check", "check", "evaluate the well-posedness condition and c_min"},
      {"run-ade", "ade", "time-step the convolution-free system"},
      {"run-conv", "convolution", "time-step the convolution form (reference oracle)"},
      {"compare", "compare", "ADE vs convolution trajectory refinement study"},
      {"mms", "mms", "manufactured-solution convergence study"},
      {"transfer", "transfer", "ADE frequency-response study against the series"},
  };

  std::string mode;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->fallthrough();  // global options may follow the subcommand
    sub->add_option("--config", config, "configuration file")->required();
    sub->add_option("--out", out, "output directory (default: out)");
    sub->add_flag("--quiet", quiet, "suppress stdout reporting");
    sub->callback([&mode, m = s.mode] { mode = m; });
  }

  CLI11_PARSE(app, argc, argv);

  if (!simd.empty()) {
    try {
      if (simd == "scalar")
        biot::kernels::set_active_isa(biot::kernels::Isa::scalar);
      else if (simd == "avx2")
        biot::kernels::set_active_isa(biot::kernels::Isa::avx2);
      else if (simd == "neon")
        biot::kernels::set_active_isa(biot::kernels::Isa::neon);
      else
        throw std::invalid_argument("unknown lane " + simd);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "config error: --simd: %s\n", e.what());
      return 2;
    }
  }

  return biot::run_scenario(config, out, quiet, mode);
}
