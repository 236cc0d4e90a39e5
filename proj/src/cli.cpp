#include "relnn/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "relnn/datasets.hpp"
#include "relnn/io.hpp"
#include "relnn/model_io.hpp"

namespace relnn::cli {
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

void RunConfig::apply_seed() {
  world.seed = seed;
  tower.seed = seed;
  train.seed = seed;
  finetune.seed = seed + 6;
}

void RunConfig::validate() const {
  world.validate();
  tower.validate();
  train.validate();
  const auto check_split = [](const std::vector<double>& split, std::size_t parts,
                              const char* name) {
    if (split.size() != parts) {
      throw std::invalid_argument(std::string(name) + " must have " + std::to_string(parts) +
                                  " fractions");
    }
  };
  check_split(click_split, 2, "click_split");
  check_split(rating_split, 3, "rating_split");
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  if (vocab_max_size < 2) throw std::invalid_argument("vocab_max_size must be >= 2");
  if (finetune.batch_size < 1) throw std::invalid_argument("finetune batch_size must be >= 1");
  if (!(finetune.optimizer.lr > 0.0)) throw std::invalid_argument("finetune lr must be positive");
}

Json to_json(const RunConfig& c) {
  Json world = synth::world_config_to_json(c.world);
  world.erase("seed");
  return {
      {"seed", c.seed},
      {"world", std::move(world)},
      {"sessions",
       {{"count", c.n_sessions},
        {"displayed", c.sessions.displayed},
        {"relevant_share", c.sessions.relevant_share},
        {"click_slope", c.sessions.click_slope},
        {"click_center", c.sessions.click_center},
        {"alpha_weight", c.sessions.alpha_weight},
        {"n_days", c.sessions.n_days}}},
      {"ratings",
       {{"count", c.n_ratings},
        {"relevant_share", c.ratings.relevant_share},
        {"noise", c.ratings.noise},
        {"noise_rate", c.ratings.noise_rate}}},
      {"data",
       {{"window_days", c.window_days},
        {"top_k", c.top_k},
        {"vocab_max_size", c.vocab_max_size},
        {"vocab_min_count", c.vocab_min_count},
        {"click_split", c.click_split},
        {"rating_split", c.rating_split}}},
      {"tower", {{"embed_dim", c.tower.embed_dim}, {"layers", c.tower.layers}}},
      {"train",
       {{"batch_size", c.train.batch_size},
        {"steps", c.train.steps},
        {"bn", c.train.bn_enabled},
        {"bn_loss", bn_loss_name(c.train.bn_loss)},
        {"margin", c.train.margin},
        {"optimizer", optimizer_name(c.train.optimizer.kind)},
        {"lr", c.train.optimizer.lr},
        {"eval_every", c.train.eval_every},
        {"eval_bn_batches", c.train.eval_bn_batches},
        {"eval_max_pairs", c.train.eval_max_pairs}}},
      {"finetune",
       {{"mode", mode_name(c.finetune.mode)},
        {"layers", c.finetune.layers},
        {"steps", c.finetune.steps},
        {"batch_size", c.finetune.batch_size},
        {"optimizer", optimizer_name(c.finetune.optimizer.kind)},
        {"lr", c.finetune.optimizer.lr}}},
  };
}

namespace {

void check_known_keys(const Json& input, const Json& reference, const std::string& prefix) {
  if (!input.is_object()) throw std::invalid_argument("config" + prefix + " must be an object");
  for (const auto& [key, value] : input.items()) {
    const auto it = reference.find(key);
    if (it == reference.end()) {
      throw std::invalid_argument("unknown config key '" + prefix + key + "'");
    }
    if (it->is_object()) check_known_keys(value, *it, prefix + key + ".");
  }
}

}  // namespace

RunConfig run_config_from_json(const Json& json, RunConfig base) {
  Json merged = to_json(base);
  check_known_keys(json, merged, "");
  merged.merge_patch(json);
  RunConfig c = base;
  try {
    c.seed = merged.at("seed").get<std::uint64_t>();
    c.world = synth::world_config_from_json(merged.at("world"));
    const auto& s = merged.at("sessions");
    c.n_sessions = s.at("count").get<std::size_t>();
    c.sessions.displayed = s.at("displayed").get<std::size_t>();
    c.sessions.relevant_share = s.at("relevant_share").get<double>();
    c.sessions.click_slope = s.at("click_slope").get<double>();
    c.sessions.click_center = s.at("click_center").get<double>();
    c.sessions.alpha_weight = s.at("alpha_weight").get<double>();
    c.sessions.n_days = s.at("n_days").get<std::uint32_t>();
    const auto& r = merged.at("ratings");
    c.n_ratings = r.at("count").get<std::size_t>();
    c.ratings.relevant_share = r.at("relevant_share").get<double>();
    c.ratings.noise = r.at("noise").get<bool>();
    c.ratings.noise_rate = r.at("noise_rate").get<double>();
    const auto& d = merged.at("data");
    c.window_days = d.at("window_days").get<std::uint32_t>();
    c.top_k = d.at("top_k").get<std::size_t>();
    c.vocab_max_size = d.at("vocab_max_size").get<std::size_t>();
    c.vocab_min_count = d.at("vocab_min_count").get<std::size_t>();
    c.click_split = d.at("click_split").get<std::vector<double>>();
    c.rating_split = d.at("rating_split").get<std::vector<double>>();
    const auto& t = merged.at("tower");
    c.tower.embed_dim = t.at("embed_dim").get<std::size_t>();
    c.tower.layers = t.at("layers").get<std::vector<std::size_t>>();
    const auto& tr = merged.at("train");
    c.train.batch_size = tr.at("batch_size").get<std::size_t>();
    c.train.steps = tr.at("steps").get<std::size_t>();
    c.train.bn_enabled = tr.at("bn").get<bool>();
    c.train.bn_loss = parse_bn_loss(tr.at("bn_loss").get<std::string>());
    c.train.margin = tr.at("margin").get<double>();
    c.train.optimizer.kind = parse_optimizer(tr.at("optimizer").get<std::string>());
    c.train.optimizer.lr = tr.at("lr").get<double>();
    c.train.eval_every = tr.at("eval_every").get<std::size_t>();
    c.train.eval_bn_batches = tr.at("eval_bn_batches").get<std::size_t>();
    c.train.eval_max_pairs = tr.at("eval_max_pairs").get<std::size_t>();
    const auto& f = merged.at("finetune");
    c.finetune.mode = parse_mode(f.at("mode").get<std::string>());
    c.finetune.layers = f.at("layers").get<std::vector<std::size_t>>();
    c.finetune.steps = f.at("steps").get<std::size_t>();
    c.finetune.batch_size = f.at("batch_size").get<std::size_t>();
    c.finetune.optimizer.kind = parse_optimizer(f.at("optimizer").get<std::string>());
    c.finetune.optimizer.lr = f.at("lr").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  c.apply_seed();
  return c;
}

std::vector<std::size_t> parse_layers(const std::string& csv) {
  std::vector<std::size_t> out;
  std::stringstream in(csv);
  for (std::string part; std::getline(in, part, ',');) {
    std::size_t used = 0;
    unsigned long long value = 0;
    try {
      value = std::stoull(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || value == 0) {
      throw std::invalid_argument("bad layer width '" + part + "' in '" + csv + "'");
    }
    out.push_back(static_cast<std::size_t>(value));
  }
  if (out.empty()) throw std::invalid_argument("empty layer list");
  return out;
}

ScoreSummary summarize_scores(std::span<const float> scores) {
  if (scores.empty()) throw std::invalid_argument("summarize_scores: no scores");
  ScoreSummary s{scores[0], scores[0], 0.0};
  double sum = 0.0;
  for (const float v : scores) {
    s.min = std::min<double>(s.min, v);
    s.max = std::max<double>(s.max, v);
    sum += v;
  }
  s.mean = sum / static_cast<double>(scores.size());
  return s;
}

std::optional<double> separation_ratio(double gap_a, double gap_b) {
  if (gap_a == gap_b) return 1.0;
  if (gap_b == 0.0) return std::nullopt;
  return gap_a / gap_b;
}

namespace {

// Flags shared by every subcommand; each overrides the config file.
struct CommonFlags {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::size_t batch_size = 0;
  std::size_t embed_dim = 0;
  std::string layers;
  std::string bn;
  std::string bn_loss;
  double margin = 0.0;
  std::string mode;

  std::vector<CLI::Option*> options;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* batch_opt = nullptr;
  CLI::Option* embed_opt = nullptr;
  CLI::Option* margin_opt = nullptr;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "Run config JSON")->check(CLI::ExistingFile);
  app->add_option("--out", f.out, "Output directory");
  f.seed_opt = app->add_option("--seed", f.seed, "Run seed");
  f.steps_opt = app->add_option("--steps", f.steps, "Training steps");
  f.batch_opt = app->add_option("--batch-size", f.batch_size, "Mini-batch size");
  f.embed_opt = app->add_option("--embed-dim", f.embed_dim, "Embedding width");
  app->add_option("--layers", f.layers, "Tower widths, e.g. 128,64,1");
  app->add_option("--bn", f.bn, "Batch negatives")->check(CLI::IsMember({"on", "off"}));
  app->add_option("--bn-loss", f.bn_loss, "Batch-negative loss")
      ->check(CLI::IsMember({"logloss", "hinge"}));
  f.margin_opt = app->add_option("--margin", f.margin, "Hinge margin");
  app->add_option("--mode", f.mode, "Fine-tune mode")
      ->check(CLI::IsMember(
          {"click_only", "pointwise_simple", "pointwise_ensemble", "pairwise_ensemble"}));
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig c;
  if (!f.config.empty()) c = run_config_from_json(Json::parse(io::read_text(f.config)));
  if (f.seed_opt->count()) {
    c.seed = f.seed;
    c.apply_seed();
  }
  // --steps and --batch-size apply to whichever stage the command trains.
  if (f.steps_opt->count()) {
    c.train.steps = f.steps;
    c.finetune.steps = f.steps;
  }
  if (f.batch_opt->count()) {
    c.train.batch_size = f.batch_size;
    c.finetune.batch_size = f.batch_size;
  }
  if (f.embed_opt->count()) c.tower.embed_dim = f.embed_dim;
  if (!f.layers.empty()) c.tower.layers = parse_layers(f.layers);
  if (!f.bn.empty()) c.train.bn_enabled = f.bn == "on";
  if (!f.bn_loss.empty()) c.train.bn_loss = parse_bn_loss(f.bn_loss);
  if (f.margin_opt->count()) c.train.margin = f.margin;
  if (!f.mode.empty()) c.finetune.mode = parse_mode(f.mode);
  c.validate();
  return c;
}

std::string dump(const Json& json) { return json.dump(2) + "\n"; }

void echo_config(const RunConfig& c, const std::string& out) {
  if (!out.empty()) io::write_text(fs::path(out) / "config.json", dump(to_json(c)));
}

const std::string& require(const std::string& value, const char* flag) {
  if (value.empty()) throw std::invalid_argument(std::string(flag) + " is required");
  return value;
}

Json click_eval_json(const ClickEval& e) {
  const auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  return {{"orig_auc", opt(e.orig_auc)},
          {"bn_auc", opt(e.bn_auc)},
          {"pair_accuracy", opt(e.pair_accuracy)},
          {"orig_loss", e.orig_loss},
          {"bn_loss", e.bn_loss}};
}

Vocab vocab_from_pairs(std::span<const SessionPair> pairs, const RunConfig& c) {
  std::vector<std::string> corpus;
  corpus.reserve(3 * pairs.size());
  for (const auto& p : pairs) {
    corpus.push_back(p.query);
    corpus.push_back(p.title_pos);
    corpus.push_back(p.title_neg);
  }
  return build_vocab(corpus, c.vocab_max_size, c.vocab_min_count);
}

int cmd_gen(const RunConfig& c, const std::string& out, std::ostream& log) {
  require(out, "--out");
  const synth::World world = synth::gen_world(c.world);
  const auto sessions = synth::simulate_sessions(world, c.n_sessions, c.session_seed(), c.sessions);
  const auto ratings = synth::gen_ratings(world, c.n_ratings, c.rating_seed(), c.ratings);
  const fs::path dir(out);
  io::write_text(dir / "world.json", dump(synth::world_to_json(world)));
  io::write_sessions(sessions, dir / "sessions.jsonl");
  io::write_ratings(ratings, dir / "ratings.jsonl");
  echo_config(c, out);
  log << "gen: " << world.items.size() << " items, " << world.queries.size() << " queries, "
      << sessions.size() << " sessions, " << ratings.size() << " ratings -> " << out << "\n";
  return 0;
}

int cmd_build_vocab(const RunConfig& c, const std::string& pairs_path, const std::string& out,
                    std::ostream& log) {
  const auto pairs = io::read_session_pairs(require(pairs_path, "--pairs"));
  const Vocab vocab = vocab_from_pairs(pairs, c);
  write_vocab_file(vocab, fs::path(require(out, "--out")) / "vocab.txt");
  echo_config(c, out);
  log << "build-vocab: " << vocab.size() << " terms\n";
  return 0;
}

int cmd_prepare(const RunConfig& c, const std::string& sessions_path,
                const std::string& ratings_path, const std::string& out, std::ostream& log) {
  require(out, "--out");
  const auto sessions = io::read_sessions(require(sessions_path, "--sessions"));
  std::vector<FiveTuple> tuples;
  for (const auto& s : sessions) {
    auto t = sessions_to_tuples(s);
    tuples.insert(tuples.end(), std::make_move_iterator(t.begin()),
                  std::make_move_iterator(t.end()));
  }
  const auto aggregated = aggregate_tuples(tuples, c.window_days);
  const auto kept = retain_top_k(aggregated, c.top_k);
  const auto pairs = to_session_pairs(kept);
  const auto splits = split_by_query<SessionPair>(pairs, c.click_split, c.split_seed());
  const fs::path dir(out);
  io::write_session_pairs(splits[0], dir / "pairs_train.jsonl");
  io::write_session_pairs(splits[1], dir / "pairs_eval.jsonl");
  const Vocab vocab = vocab_from_pairs(splits[0], c);
  write_vocab_file(vocab, dir / "vocab.txt");

  Json stats = {{"sessions", sessions.size()},     {"tuples", tuples.size()},
                {"aggregated", aggregated.size()}, {"retained", kept.size()},
                {"pairs_train", splits[0].size()}, {"pairs_eval", splits[1].size()},
                {"vocab_size", vocab.size()}};
  if (!ratings_path.empty()) {
    const auto ratings = io::read_ratings(ratings_path);
    const auto rs = split_by_query<RatingExample>(ratings, c.rating_split, c.split_seed());
    io::write_ratings(rs[0], dir / "ratings_train.jsonl");
    io::write_ratings(rs[1], dir / "ratings_valid.jsonl");
    io::write_ratings(rs[2], dir / "ratings_test.jsonl");
    stats["ratings_train"] = rs[0].size();
    stats["ratings_valid"] = rs[1].size();
    stats["ratings_test"] = rs[2].size();
  }
  io::write_text(dir / "prepare.json", dump(stats));
  echo_config(c, out);
  log << "prepare: " << stats.dump() << "\n";
  return 0;
}

int cmd_train(const RunConfig& c, const std::string& data, const std::string& out,
              std::ostream& log) {
  require(out, "--out");
  const fs::path in(require(data, "--data"));
  const Vocab vocab = read_vocab_file(in / "vocab.txt");
  const auto train_pairs = io::read_session_pairs(in / "pairs_train.jsonl");
  const auto eval_pairs = io::read_session_pairs(in / "pairs_eval.jsonl");
  const auto train = encode_pairs(train_pairs, vocab);
  const auto eval = encode_pairs(eval_pairs, vocab);
  const ClickTrainResult result = train_click_model(train, eval, vocab.size(), c.tower, c.train);
  const ModelBundle bundle{vocab, result.params, {}, EnsembleMode::kClickOnly};
  const fs::path dir(out);
  save_model(bundle, dir / "model.bin", to_json(c));
  write_history_csv(result.history, dir / "history.csv");
  Json metrics = eval.empty() ? Json::object()
                              : click_eval_json(evaluate_click_model(eval, result.params, c.train));
  io::write_text(dir / "metrics.json", dump(metrics));
  echo_config(c, out);
  log << "train: " << c.train.steps << " steps, eval " << metrics.dump() << "\n";
  return 0;
}

int cmd_finetune(const RunConfig& c, const std::string& model, const std::string& data,
                 const std::string& out, std::ostream& log) {
  require(out, "--out");
  const ModelBundle click = load_model(require(model, "--model"));
  const fs::path in(require(data, "--data"));
  const auto train = io::read_ratings(in / "ratings_train.jsonl");
  const ModelBundle bundle = finetune(train, click.vocab, click.click, c.finetune);
  const fs::path dir(out);
  save_model(bundle, dir / "model.bin", to_json(c));
  Json metrics = {{"mode", mode_name(bundle.mode)}};
  for (const char* split : {"valid", "test"}) {
    const fs::path path = in / (std::string("ratings_") + split + ".jsonl");
    if (!fs::exists(path)) continue;
    metrics[split] = metrics::to_json(evaluate_bundle(io::read_ratings(path), bundle));
  }
  io::write_text(dir / "metrics.json", dump(metrics));
  echo_config(c, out);
  log << "finetune: " << metrics.dump() << "\n";
  return 0;
}

int cmd_eval(const RunConfig& c, const std::string& model, const std::string& ratings,
             const std::string& out, std::ostream& log) {
  const ModelBundle bundle = load_model(require(model, "--model"));
  const auto examples = io::read_ratings(require(ratings, "--ratings"));
  const Json report = metrics::to_json(evaluate_bundle(examples, bundle));
  if (!out.empty()) {
    io::write_text(fs::path(out) / "metrics.json", dump(report));
    echo_config(c, out);
  }
  log << dump(report);
  return 0;
}

int cmd_score(const RunConfig& c, const std::string& model, const std::string& input,
              const std::string& out, std::ostream& log) {
  const ModelBundle bundle = load_model(require(model, "--model"));
  std::string lines;
  for (const auto& row : io::read_query_titles(require(input, "--input"))) {
    const float score = ensemble_score(std::string_view(row.query), row.title, bundle);
    lines += Json{{"query", row.query}, {"title", row.title}, {"score", score}}.dump() + "\n";
  }
  if (!out.empty()) {
    io::write_text(fs::path(out) / "scores.jsonl", lines);
    echo_config(c, out);
  } else {
    log << lines;
  }
  return 0;
}

int cmd_case_study(const RunConfig& c, const std::string& model, const std::string& baseline,
                   const std::string& items_path, const std::string& query,
                   const std::string& other, const std::string& out, std::ostream& log) {
  const auto titles = io::read_titles(require(items_path, "--items"));
  if (titles.empty()) throw std::invalid_argument("case-study: item list is empty");
  require(query, "--query");
  require(other, "--other-query");

  std::vector<std::pair<std::string, std::string>> models{{"model", require(model, "--model")}};
  if (!baseline.empty()) models.emplace_back("baseline", baseline);

  Json reports = Json::array();
  std::vector<double> gaps;
  for (const auto& [name, path] : models) {
    const ModelBundle bundle = load_model(path);
    std::vector<float> matched, mismatched;
    Json items = Json::array();
    for (const auto& title : titles) {
      matched.push_back(ensemble_score(std::string_view(query), title, bundle));
      mismatched.push_back(ensemble_score(std::string_view(other), title, bundle));
      items.push_back({{"title", title}, {"query", matched.back()}, {"other_query", mismatched.back()}});
    }
    const ScoreSummary a = summarize_scores(matched);
    const ScoreSummary b = summarize_scores(mismatched);
    gaps.push_back(a.mean - b.mean);
    const auto summary = [](const ScoreSummary& s) {
      return Json{{"min", s.min}, {"max", s.max}, {"mean", s.mean}};
    };
    reports.push_back({{"name", name},
                       {"path", path},
                       {"query", summary(a)},
                       {"other_query", summary(b)},
                       {"gap", gaps.back()},
                       {"items", std::move(items)}});
  }
  Json report = {{"query", query}, {"other_query", other}, {"models", std::move(reports)}};
  if (gaps.size() == 2) {
    const auto ratio = separation_ratio(gaps[0], gaps[1]);
    report["separation_ratio"] = ratio ? Json(*ratio) : Json(nullptr);
  } else {
    report["separation_ratio"] = nullptr;
  }
  if (!out.empty()) {
    io::write_text(fs::path(out) / "case_study.json", dump(report));
    echo_config(c, out);
  }
  log << dump(report);
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pairwise relevance model pipeline", "relnn"};
  app.require_subcommand(1, 1);

  struct Command {
    CLI::App* app;
    CommonFlags flags;
  };
  std::vector<std::unique_ptr<Command>> commands;
  std::string data, model, baseline, input, pairs, sessions, ratings, items, query, other;
  const auto add = [&](const char* name, const char* help) {
    auto cmd = std::make_unique<Command>();
    cmd->app = app.add_subcommand(name, help);
    add_common(cmd->app, cmd->flags);
    commands.push_back(std::move(cmd));
    return commands.back()->app;
  };

  add("gen", "Generate a synthetic world, click sessions and ratings");
  auto* vocab_cmd = add("build-vocab", "Build the n-gram vocabulary from session pairs");
  vocab_cmd->add_option("--pairs", pairs, "Session pairs JSONL");
  auto* prepare_cmd = add("prepare", "Turn sessions into split session pairs and a vocabulary");
  prepare_cmd->add_option("--sessions", sessions, "Sessions JSONL");
  prepare_cmd->add_option("--ratings", ratings, "Ratings JSONL to split");
  auto* train_cmd = add("train", "Train the click model");
  train_cmd->add_option("--data", data, "Directory written by prepare");
  auto* ft_cmd = add("finetune", "Fine-tune on ratings");
  ft_cmd->add_option("--model", model, "Click model file");
  ft_cmd->add_option("--data", data, "Directory written by prepare");
  auto* eval_cmd = add("eval", "Rating metrics for a model");
  eval_cmd->add_option("--model", model, "Model file");
  eval_cmd->add_option("--ratings", ratings, "Ratings JSONL");
  auto* score_cmd = add("score", "Score query/title pairs");
  score_cmd->add_option("--model", model, "Model file");
  score_cmd->add_option("--input", input, "JSONL with query and title");
  auto* case_cmd = add("case-study", "Score items under two queries");
  case_cmd->add_option("--model", model, "Model file");
  case_cmd->add_option("--baseline", baseline, "Second model to compare against");
  case_cmd->add_option("--items", items, "JSONL with title");
  case_cmd->add_option("--query", query, "Query the items match");
  case_cmd->add_option("--other-query", other, "Query the items do not match");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const Command* active = nullptr;
  for (const auto& cmd : commands) {
    if (cmd->app->parsed()) active = cmd.get();
  }
  const std::string name = active->app->get_name();
  const CommonFlags& f = active->flags;
  try {
    const RunConfig c = resolve_config(f);
    if (name == "gen") return cmd_gen(c, f.out, out);
    if (name == "build-vocab") return cmd_build_vocab(c, pairs, f.out, out);
    if (name == "prepare") return cmd_prepare(c, sessions, ratings, f.out, out);
    if (name == "train") return cmd_train(c, data, f.out, out);
    if (name == "finetune") return cmd_finetune(c, model, data, f.out, out);
    if (name == "eval") return cmd_eval(c, model, ratings, f.out, out);
    if (name == "score") return cmd_score(c, model, input, f.out, out);
    return cmd_case_study(c, model, baseline, items, query, other, f.out, out);
  } catch (const std::exception& e) {
    err << "relnn " << name << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace relnn::cli
