// Regenerates the bundled synthetic fixture (data/fixture_1k). The output is
// committed, so this only needs to run when the generator changes.

#include <iostream>

#include "synth.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: polaris_fixturegen <output-dir>\n";
    return 1;
  }
  polaris::synth::SynthConfig cfg;
  cfg.seed = 20210131;
  cfg.n_periods = 27;
  cfg.n_users = 160;
  cfg.target_submissions = 1230;
  cfg.post_fraction = 0.08;
  cfg.label_coverage = 0.9;
  cfg.gold_coverage = 0.05;
  const auto paths = polaris::synth::write_synthetic_corpus(cfg, argv[1]);
  std::cerr << "wrote " << paths.submissions << "\n";
  return 0;
}
