// Command-line pipeline: run configuration and subcommand dispatch.

#ifndef RELNN_CLI_HPP_
#define RELNN_CLI_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "relnn/click_trainer.hpp"
#include "relnn/finetune.hpp"
#include "relnn/synth_world.hpp"
#include "relnn/tower.hpp"

namespace relnn::cli {

// Everything a pipeline run depends on. Component seeds are derived from
// `seed` so a single flag reseeds the whole run.
struct RunConfig {
  std::uint64_t seed = 1;
  synth::WorldConfig world;
  synth::SessionConfig sessions;
  std::size_t n_sessions = 50000;
  synth::RatingConfig ratings;
  std::size_t n_ratings = 20000;
  std::uint32_t window_days = 180;
  std::size_t top_k = 100;
  std::size_t vocab_max_size = 200000;
  std::size_t vocab_min_count = 1;
  std::vector<double> click_split{0.9, 0.1};
  std::vector<double> rating_split{0.65, 0.30, 0.05};
  TowerConfig tower;
  TrainConfig train;
  FinetuneConfig finetune;

  // Seeds of the individual stages.
  std::uint64_t world_seed() const { return seed; }
  std::uint64_t session_seed() const { return seed + 1; }
  std::uint64_t rating_seed() const { return seed + 2; }
  std::uint64_t split_seed() const { return seed; }

  // Pushes `seed` into the component configs.
  void apply_seed();
  // Throws std::invalid_argument.
  void validate() const;
};

nlohmann::ordered_json to_json(const RunConfig& config);
// Fields absent from `json` keep their values from `base`. Unknown keys
// throw std::invalid_argument.
RunConfig run_config_from_json(const nlohmann::ordered_json& json, RunConfig base = {});

// Parses "128,64,1". Throws std::invalid_argument.
std::vector<std::size_t> parse_layers(const std::string& csv);

struct ScoreSummary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

// Throws std::invalid_argument on an empty range.
ScoreSummary summarize_scores(std::span<const float> scores);

// gap_a / gap_b; 1 when the gaps are equal (including both zero), empty when
// only gap_b is zero.
std::optional<double> separation_ratio(double gap_a, double gap_b);

// Runs one command. args excludes the program name. Returns the exit code:
// 0 on success, 1 on pipeline errors, 2 on usage errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relnn::cli

#endif  // RELNN_CLI_HPP_
