#include "strapsim/cli/app.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "strapsim/constituent/forest.hpp"
#include "strapsim/error.hpp"
#include "strapsim/eval/experiments.hpp"
#include "strapsim/ingest/csv.hpp"
#include "strapsim/ingest/datasets.hpp"
#include "strapsim/ingest/io.hpp"
#include "strapsim/util/parallel.hpp"
#include "strapsim/util/text.hpp"

namespace strapsim::cli {

namespace fs = std::filesystem;

nlohmann::json to_json(const RunConfig& c) {
  return {{"command", c.command},
          {"inputs", c.inputs},
          {"metrics", c.metrics},
          {"k", c.k},
          {"k_sweep", c.k_sweep},
          {"folds", c.folds},
          {"seed", c.seed},
          {"min_match_sim", c.min_match_sim},
          {"normalize", c.normalize},
          {"threads", c.threads},
          {"out", c.out},
          {"format", c.format},
          {"dataset", c.dataset},
          {"users", c.users},
          {"movies", c.movies},
          {"planted", c.planted},
          {"id_column", c.id_column},
          {"targets", c.targets},
          {"forest_trees", c.forest_trees},
          {"forest_depth", c.forest_depth},
          {"synthetic", ingest::to_json(c.synthetic)}};
}

RunConfig run_config_from_json(const nlohmann::json& doc) {
  RunConfig c;
  try {
    c.command = doc.at("command").get<std::string>();
    c.inputs = doc.value("inputs", c.inputs);
    c.metrics = doc.value("metrics", c.metrics);
    c.k = doc.value("k", c.k);
    c.k_sweep = doc.value("k_sweep", c.k_sweep);
    c.folds = doc.value("folds", c.folds);
    c.seed = doc.value("seed", c.seed);
    c.min_match_sim = doc.value("min_match_sim", c.min_match_sim);
    c.normalize = doc.value("normalize", c.normalize);
    c.threads = doc.value("threads", c.threads);
    c.out = doc.value("out", c.out);
    c.format = doc.value("format", c.format);
    c.dataset = doc.value("dataset", c.dataset);
    c.users = doc.value("users", c.users);
    c.movies = doc.value("movies", c.movies);
    c.planted = doc.value("planted", c.planted);
    c.id_column = doc.value("id_column", c.id_column);
    c.targets = doc.value("targets", c.targets);
    c.forest_trees = doc.value("forest_trees", c.forest_trees);
    c.forest_depth = doc.value("forest_depth", c.forest_depth);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("run config: ") + e.what());
  }
  if (doc.contains("synthetic")) c.synthetic = ingest::synthetic_spec_from_json(doc.at("synthetic"));
  return c;
}

namespace {

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

const std::string& input(const RunConfig& c, const std::string& role) {
  auto it = c.inputs.find(role);
  if (it == c.inputs.end() || it->second.empty()) {
    throw Error(ErrorCode::InvalidArgument, c.command + " needs --" + role);
  }
  return it->second;
}

std::optional<std::string> optional_input(const RunConfig& c, const std::string& role) {
  auto it = c.inputs.find(role);
  if (it == c.inputs.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

std::vector<metrics::Metric> selected_metrics(const RunConfig& c) {
  std::vector<metrics::Metric> out;
  for (const auto& name : c.metrics) {
    if (name == "all") return eval::all_metrics();
    const auto m = metrics::parse_metric(name);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) return eval::all_metrics();
  return out;
}

bool resolve_normalize(const RunConfig& c, bool fallback) {
  if (c.normalize == "yes") return true;
  if (c.normalize == "no") return false;
  if (c.normalize == "auto") return fallback;
  throw Error(ErrorCode::InvalidArgument, "--normalize must be auto, yes or no");
}

metrics::StrapsimOptions strapsim_options(const RunConfig& c) {
  if (!(c.min_match_sim >= 0.0 && c.min_match_sim <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "--min-match-sim must lie in [0, 1]");
  }
  metrics::StrapsimOptions o;
  o.min_match_sim = c.min_match_sim;
  return o;
}

void check_format(const RunConfig& c) {
  if (c.format != "csv" && c.format != "json") {
    throw Error(ErrorCode::InvalidArgument, "--format must be csv or json");
  }
}

// Constituents held by at least one set, in first-seen order.
constituent::FeatureTable held_rows(const constituent::FeatureTable& table, const std::vector<WeightedSet>& sets) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < table.rows(); ++r) row_of.emplace(table.row_ids[r], r);
  std::vector<std::size_t> picks;
  std::set<std::size_t> seen;
  for (const auto& set : sets) {
    for (const auto& id : set.ids()) {
      auto it = row_of.find(id.str());
      if (it == row_of.end()) {
        throw Error(ErrorCode::UnknownConstituent, "constituent '" + id.str() + "' has no feature row");
      }
      if (seen.insert(it->second).second) picks.push_back(it->second);
    }
  }
  return table.select_rows(picks);
}

std::vector<constituent::ForestModel> load_models(const std::string& path) {
  const auto text = ingest::read_file(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return constituent::forests_from_json(doc);
}

// Constituent similarity from --matrix, or from a saved forest and feature
// table. Null when neither is given.
std::optional<SimilarityMatrix> constituent_similarity(const RunConfig& c, const std::vector<WeightedSet>& sets) {
  if (auto path = optional_input(c, "matrix")) return ingest::load_matrix(*path);
  if (auto model_path = optional_input(c, "model")) {
    const auto models = load_models(*model_path);
    constituent::EncodeOptions encode;
    encode.id_column = c.id_column;
    for (const auto& m : models) encode.drop_columns.push_back(m.target);
    const auto table = ingest::load_feature_table(input(c, "features"), encode);
    return constituent::forest_proximity(models, held_rows(table, sets), c.threads);
  }
  return std::nullopt;
}

void require_similarity(const std::vector<metrics::Metric>& which, const std::optional<SimilarityMatrix>& s) {
  for (auto m : which) {
    if (metrics::needs_similarity(m) && !s) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string(metrics::name(m)) + " needs a constituent similarity (--matrix or --model)");
    }
  }
}

// Square score grid with the set labels as first row and column.
std::string grid_csv(const metrics::PairwiseMatrix& m, bool residual) {
  return render([&](std::ostream& out) {
    std::vector<std::string> cells{"id"};
    cells.insert(cells.end(), m.labels.begin(), m.labels.end());
    ingest::write_csv_row(out, cells);
    for (std::size_t i = 0; i < m.size(); ++i) {
      cells = {m.labels[i]};
      for (std::size_t j = 0; j < m.size(); ++j) {
        const auto& r = m.at(i, j);
        cells.push_back(util::format_double(residual ? r.residual : r.score));
      }
      ingest::write_csv_row(out, cells);
    }
  });
}

nlohmann::json grid_json(const metrics::PairwiseMatrix& m, bool residual) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<double> row;
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(residual ? m.at(i, j).residual : m.at(i, j).score);
    rows.push_back(row);
  }
  return {{"ids", m.labels}, {"values", std::move(rows)}};
}

OutputFiles cmd_similarity(const RunConfig& c) {
  const auto which = selected_metrics(c);
  const auto sets = ingest::load_holdings(input(c, "holdings"), resolve_normalize(c, true));
  const auto s = constituent_similarity(c, sets);
  require_similarity(which, s);
  const auto options = strapsim_options(c);

  OutputFiles files;
  std::ostringstream pairs_csv;
  nlohmann::json pairs_json = nlohmann::json::array();
  pairs_csv << "a,b,metric,score\n";
  for (auto m : which) {
    const auto pm = metrics::pairwise_matrix(sets, s ? &*s : nullptr, m, options, c.threads);
    const std::string name(metrics::name(m));
    if (c.format == "json") {
      files.emplace_back("matrix-" + name + ".json", dump(grid_json(pm, false)));
      files.emplace_back("residuals-" + name + ".json", dump(grid_json(pm, true)));
    } else {
      files.emplace_back("matrix-" + name + ".csv", grid_csv(pm, false));
      files.emplace_back("residuals-" + name + ".csv", grid_csv(pm, true));
    }
    for (std::size_t i = 0; i < pm.size(); ++i) {
      for (std::size_t j = 0; j < pm.size(); ++j) {
        const double score = pm.at(i, j).score;
        const std::string cells[] = {pm.labels[i], pm.labels[j], name, util::format_double(score)};
        ingest::write_csv_row(pairs_csv, cells);
        pairs_json.push_back({{"a", pm.labels[i]}, {"b", pm.labels[j]}, {"metric", name}, {"score", score}});
      }
    }
  }
  if (c.format == "json") {
    files.emplace_back("pairs.json", dump(pairs_json));
  } else {
    files.emplace_back("pairs.csv", pairs_csv.str());
  }
  return files;
}

OutputFiles cmd_proximity(const RunConfig& c) {
  if (c.targets.empty()) throw Error(ErrorCode::InvalidArgument, "proximity needs at least one --target");
  constituent::EncodeOptions encode;
  encode.id_column = c.id_column;
  encode.target_columns = c.targets;
  const auto table = ingest::load_feature_table(input(c, "features"), encode);

  constituent::ForestConfig base;
  base.seed = c.seed;
  base.trees = c.forest_trees;
  base.max_depth = c.forest_depth;
  std::vector<constituent::ForestReport> reports;
  for (const auto& target : c.targets) {
    reports.push_back(constituent::forest_train(table, target, base, constituent::TuningOptions{}, c.threads));
  }
  std::vector<constituent::ForestModel> models;
  for (const auto& r : reports) models.push_back(r.model);

  const auto rows = optional_input(c, "holdings")
                        ? held_rows(table, ingest::load_holdings(input(c, "holdings"), true))
                        : table;
  const auto proximity = constituent::forest_proximity(models, rows, c.threads);

  OutputFiles files;
  files.emplace_back("model.json", dump(constituent::to_json(models)));
  nlohmann::json report = nlohmann::json::array();
  std::ostringstream report_csv;
  report_csv << "target,trees,max_depth,train_rows,test_rows,train_rmse,test_rmse,train_mape,test_mape\n";
  for (const auto& r : reports) {
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& g : r.grid) grid.push_back({{"trees", g.trees}, {"max_depth", g.max_depth}, {"cv_rmse", g.cv_rmse}});
    report.push_back({{"target", r.model.target},
                      {"trees", r.model.config.trees},
                      {"max_depth", r.model.config.max_depth},
                      {"train_rows", r.train_ids.size()},
                      {"test_rows", r.test_ids.size()},
                      {"train_rmse", r.train_rmse},
                      {"test_rmse", r.test_rmse},
                      {"train_mape", r.train_mape},
                      {"test_mape", r.test_mape},
                      {"grid", std::move(grid)}});
    const std::string cells[] = {r.model.target,
                                 std::to_string(r.model.config.trees),
                                 std::to_string(r.model.config.max_depth),
                                 std::to_string(r.train_ids.size()),
                                 std::to_string(r.test_ids.size()),
                                 util::format_double(r.train_rmse),
                                 util::format_double(r.test_rmse),
                                 util::format_double(r.train_mape),
                                 util::format_double(r.test_mape)};
    ingest::write_csv_row(report_csv, cells);
  }
  if (c.format == "json") {
    files.emplace_back("forest-report.json", dump(report));
    files.emplace_back("proximity.json", render([&](std::ostream& out) { ingest::write_matrix_json(out, proximity); }));
  } else {
    files.emplace_back("forest-report.csv", report_csv.str());
    files.emplace_back("proximity.csv", render([&](std::ostream& out) { ingest::write_matrix_csv(out, proximity); }));
  }
  return files;
}

void add_report_files(OutputFiles& files, const RunConfig& c, const std::vector<eval::EvalReport>& table,
                      const nlohmann::json& json) {
  if (c.format == "json") {
    files.emplace_back("report.json", dump(json));
    return;
  }
  files.emplace_back("table.csv", render([&](std::ostream& out) { eval::write_summary_table_csv(out, table); }));
  files.emplace_back("folds.csv", render([&](std::ostream& out) { eval::write_report_csv(out, table); }));
}

void add_ranking_files(OutputFiles& files, const RunConfig& c, const eval::RankingStudy& study) {
  if (c.format == "json") {
    files.emplace_back("report.json", dump(eval::to_json(study)));
    return;
  }
  files.emplace_back("table.csv", render([&](std::ostream& out) { eval::write_ranking_table_csv(out, study); }));
  files.emplace_back("entities.csv",
                     render([&](std::ostream& out) { eval::write_ranking_entities_csv(out, study); }));
}

OutputFiles cmd_experiment(const RunConfig& c) {
  const auto which = selected_metrics(c);
  const auto options = strapsim_options(c);
  OutputFiles files;
  const std::string& d = c.dataset;

  if (d == "iris" || d == "breast-cancer" || d == "big-mac") {
    eval::ToyOptions toy;
    toy.cv.k = c.k;
    toy.cv.folds = c.folds;
    toy.cv.seed = c.seed;
    toy.k_sweep = c.k_sweep;
    toy.normalize = resolve_normalize(c, false);
    toy.strapsim = options;
    toy.metrics = which;
    toy.threads = c.threads;
    const auto& path = input(c, "data");
    const auto result = d == "iris"            ? eval::run_toy_classification(ingest::load_iris(path), d, toy)
                        : d == "breast-cancer" ? eval::run_toy_classification(ingest::load_breast_cancer(path), d, toy)
                                               : eval::run_toy_regression(ingest::load_big_mac(path), "BigMac", d, toy);
    add_report_files(files, c, result.table, eval::to_json(result));
    if (c.format == "csv") {
      files.emplace_back("sweep.csv", render([&](std::ostream& out) {
                           out << "metric,k";
                           const bool cls = result.task == eval::Task::Classification;
                           const std::vector<std::string> cols = cls ? std::vector<std::string>{"accuracy", "f1"}
                                                                     : std::vector<std::string>{"rmse", "mape", "mae"};
                           for (const auto& col : cols) out << ',' << col;
                           out << '\n';
                           for (const auto& r : result.sweep) {
                             out << r.metric << ',' << r.k;
                             for (const auto& col : cols) out << ',' << util::format_double(r.metrics.at(col));
                             out << '\n';
                           }
                         }));
    }
    return files;
  }

  if (d == "movies") {
    eval::MovieOptions movie;
    movie.users = c.users;
    movie.movies = c.movies;
    movie.k = c.k;
    movie.folds = c.folds;
    movie.seed = c.seed;
    movie.normalize = resolve_normalize(c, false);
    movie.strapsim = options;
    movie.metrics = which;
    movie.threads = c.threads;
    const auto ratings = ingest::load_ratings(input(c, "data"));
    const auto corpus = ingest::load_movie_corpus(input(c, "corpus"));
    const auto result = eval::run_movie_experiment(ratings, corpus, movie);
    add_report_files(files, c, result.table, eval::to_json(result));
    if (c.format == "csv") {
      files.emplace_back("residuals-users.csv",
                         render([&](std::ostream& out) { eval::write_movie_residuals_csv(out, result); }));
    }
    return files;
  }

  if (d == "etf-ranking") {
    const auto sets = ingest::load_holdings(input(c, "holdings"), resolve_normalize(c, true));
    const auto s = constituent_similarity(c, sets);
    require_similarity(which, s);
    const auto returns = ingest::load_returns(input(c, "returns"));
    eval::RankingOptions ranking;
    ranking.strapsim = options;
    ranking.threads = c.threads;
    add_ranking_files(files, c, eval::etf_ranking_study(sets, s ? &*s : nullptr, returns, which, ranking));
    return files;
  }

  if (d == "synthetic-etf") {
    if (c.planted) {
      eval::PlantedStudyOptions planted;
      planted.portfolios = c.synthetic.n_portfolios;
      planted.months = c.synthetic.months;
      planted.seed = c.seed;
      planted.strapsim = options;
      planted.metrics = which;
      planted.threads = c.threads;
      add_ranking_files(files, c, eval::run_planted_study(planted).ranking);
      return files;
    }
    eval::SyntheticStudyOptions study;
    study.spec = c.synthetic;
    study.spec.seed = c.seed;
    study.forest.seed = c.seed;
    study.forest.trees = c.forest_trees;
    study.forest.max_depth = c.forest_depth;
    study.strapsim = options;
    study.metrics = which;
    study.threads = c.threads;
    add_ranking_files(files, c, eval::run_synthetic_study(study).ranking);
    return files;
  }

  throw Error(ErrorCode::InvalidArgument, "unknown dataset '" + d +
                                              "' (expected iris, breast-cancer, big-mac, movies, "
                                              "etf-ranking or synthetic-etf)");
}

std::string raw_table_csv(const constituent::RawTable& t) {
  return render([&](std::ostream& out) {
    ingest::write_csv_row(out, t.header);
    for (const auto& row : t.rows) ingest::write_csv_row(out, row);
  });
}

OutputFiles cmd_generate(const RunConfig& c) {
  OutputFiles files;
  if (c.planted) {
    const auto u = ingest::generate_planted_universe(c.synthetic.n_portfolios, c.synthetic.months, c.seed);
    files.emplace_back("holdings.csv", render([&](std::ostream& out) { ingest::write_holdings(out, u.holdings); }));
    files.emplace_back("similarity.csv", render([&](std::ostream& out) { ingest::write_matrix_csv(out, u.similarity); }));
    files.emplace_back("returns.csv", render([&](std::ostream& out) { ingest::write_returns(out, u.returns); }));
    return files;
  }
  auto spec = c.synthetic;
  spec.seed = c.seed;
  const auto u = ingest::generate_synthetic_universe(spec);
  files.emplace_back("spec.json", dump(ingest::to_json(spec)));
  files.emplace_back("holdings.csv", render([&](std::ostream& out) { ingest::write_holdings(out, u.holdings); }));
  files.emplace_back("constituents.csv", raw_table_csv(u.constituents));
  files.emplace_back("returns.csv",
                     render([&](std::ostream& out) { ingest::write_returns(out, u.portfolio_returns); }));
  files.emplace_back("factor-returns.csv",
                     render([&](std::ostream& out) { ingest::write_returns(out, u.factor_returns); }));
  return files;
}

}  // namespace

OutputFiles execute(const RunConfig& c) {
  check_format(c);
  OutputFiles files;
  if (c.command == "similarity") {
    files = cmd_similarity(c);
  } else if (c.command == "proximity") {
    files = cmd_proximity(c);
  } else if (c.command == "experiment") {
    files = cmd_experiment(c);
  } else if (c.command == "generate-synthetic") {
    files = cmd_generate(c);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown command '" + c.command + "'");
  }
  files.emplace_back("run-config.json", dump(to_json(c)));
  return files;
}

void write_outputs(const std::string& dir, const OutputFiles& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  for (const auto& [name, contents] : files) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  }
}

namespace {

void setup_logging() {
  auto logger = spdlog::get("strapsim");
  if (!logger) logger = spdlog::stderr_logger_mt("strapsim");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%l] %v");
  const char* env = std::getenv("STRAPSIM_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

void report_error(bool json, std::string_view code, const std::string& message, int exit_code) {
  if (json) {
    std::cerr << nlohmann::json{{"error", code}, {"message", message}, {"exit_code", exit_code}}.dump() << '\n';
  } else {
    std::cerr << "strapsim: " << message << '\n';
  }
}

struct Flags {
  std::string holdings, matrix, model, features, returns, data, corpus, data_dir = "data";
  std::vector<std::string> metrics;
  std::optional<std::size_t> k;
  std::vector<std::size_t> k_sweep = eval::kDefaultKSweep;
  std::size_t folds = 10;
  std::uint64_t seed = 42;
  double min_match_sim = 0.0;
  std::string normalize = "auto";
  std::size_t threads = 0;
  std::string out;
  std::string format = "csv";
  std::string dataset;
  std::size_t users = 200;
  std::size_t movies = 0;
  bool planted = false;
  std::string id_column = "id";
  std::vector<std::string> targets;
  std::size_t forest_trees = 100, forest_depth = 8;
  ingest::SyntheticUniverseSpec synthetic;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--metric", f.metrics, "Metrics to compute (comma separated, or all)")->delimiter(',');
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--min-match-sim", f.min_match_sim, "Similarity floor for STRAPSim matches");
  cmd->add_option("--normalize", f.normalize, "Normalize set weights: auto, yes or no");
  cmd->add_option("--threads", f.threads, "Worker threads (0: all cores)");
  cmd->add_option("--out", f.out, "Output directory")->required();
  cmd->add_option("--format", f.format, "Output format: csv or json");
}

void add_synthetic(CLI::App* cmd, Flags& f) {
  auto& s = f.synthetic;
  cmd->add_option("--portfolios", s.n_portfolios, "Number of portfolios");
  cmd->add_option("--constituents", s.n_constituents, "Number of constituents");
  cmd->add_option("--factors", s.n_factors, "Number of return factors (sectors)");
  cmd->add_option("--holdings-per-portfolio", s.holdings_per_portfolio, "Constituents per portfolio");
  cmd->add_option("--overlap", s.overlap, "Overlap between portfolios, in [0, 1]");
  cmd->add_option("--sector-tilt", s.sector_tilt, "Strength of sector preferences");
  cmd->add_option("--noise", s.noise, "Idiosyncratic volatility in % per month");
  cmd->add_option("--months", s.months, "Months of returns");
  cmd->add_flag("--planted", f.planted, "Single-holding universe with planted concordance");
}

RunConfig to_config(const std::string& command, const Flags& f) {
  RunConfig c;
  c.command = command;
  auto put = [&](const char* role, const std::string& path) {
    if (!path.empty()) c.inputs[role] = path;
  };
  put("holdings", f.holdings);
  put("matrix", f.matrix);
  put("model", f.model);
  put("features", f.features);
  put("returns", f.returns);
  put("data", f.data);
  put("corpus", f.corpus);
  c.metrics = f.metrics.empty() ? std::vector<std::string>{"all"} : f.metrics;
  c.folds = f.folds;
  c.seed = f.seed;
  c.min_match_sim = f.min_match_sim;
  c.normalize = f.normalize;
  c.threads = f.threads;
  c.out = f.out;
  c.format = f.format;
  c.id_column = f.id_column;
  c.targets = f.targets;
  c.forest_trees = f.forest_trees;
  c.forest_depth = f.forest_depth;
  c.synthetic = f.synthetic;
  c.synthetic.seed = f.seed;
  c.planted = f.planted;
  if (command == "experiment") {
    c.dataset = f.dataset;
    c.users = f.users;
    c.movies = f.movies;
    c.k = f.k.value_or(f.dataset == "movies" ? 20 : 5);
    c.k_sweep = f.k_sweep;
    const fs::path dir(f.data_dir);
    if (f.data.empty()) {
      if (f.dataset == "iris") c.inputs["data"] = (dir / "iris.csv").string();
      if (f.dataset == "breast-cancer") c.inputs["data"] = (dir / "breast-cancer-wisconsin.csv").string();
      if (f.dataset == "big-mac") c.inputs["data"] = (dir / "bigmac.csv").string();
      if (f.dataset == "movies") c.inputs["data"] = (dir / "movies" / "ratings.csv").string();
    }
    if (f.dataset == "movies" && f.corpus.empty()) c.inputs["corpus"] = (dir / "movies" / "movies.csv").string();
  }
  return c;
}

int execute_and_write(const RunConfig& config) {
  if (config.threads > 0) util::set_default_threads(config.threads);
  const auto files = execute(config);
  write_outputs(config.out, files);
  spdlog::info("wrote {} files to {}", files.size(), config.out);
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  setup_logging();
  bool json_errors = false;
  for (int i = 1; i < argc; ++i) json_errors |= std::string_view(argv[i]) == "--json-errors";

  CLI::App app{"Residual-aware similarity for weighted sets", "strapsim"};
  app.require_subcommand(0, 1);
  app.add_flag("--json-errors", json_errors, "Print errors as JSON on stderr");
  std::string replay;
  app.add_option("--config", replay, "Re-run a saved run-config.json");
  std::string replay_out;
  app.add_option("--config-out", replay_out, "Output directory override for --config");
  Flags f;

  auto* similarity = app.add_subcommand("similarity", "Pairwise set similarity matrices");
  add_common(similarity, f);
  similarity->add_option("--holdings", f.holdings, "Holdings CSV (portfolio_id,constituent_id,weight)")->required();
  similarity->add_option("--matrix", f.matrix, "Constituent similarity matrix (CSV or JSON)");
  similarity->add_option("--model", f.model, "Forest model JSON for proximity-based similarity");
  similarity->add_option("--features", f.features, "Constituent feature CSV used with --model");
  similarity->add_option("--id-column", f.id_column, "Id column of the feature CSV");

  auto* proximity = app.add_subcommand("proximity", "Train forests and emit a proximity matrix");
  add_common(proximity, f);
  proximity->add_option("--features", f.features, "Constituent feature CSV with target columns")->required();
  proximity->add_option("--target", f.targets, "Target column(s)")->delimiter(',')->required();
  proximity->add_option("--id-column", f.id_column, "Id column of the feature CSV");
  proximity->add_option("--holdings", f.holdings, "Restrict the proximity matrix to held constituents");
  proximity->add_option("--trees", f.forest_trees, "Base number of trees");
  proximity->add_option("--depth", f.forest_depth, "Base maximum depth");

  auto* experiment = app.add_subcommand("experiment", "Run an evaluation harness");
  add_common(experiment, f);
  experiment->add_option("--dataset", f.dataset,
                         "iris, breast-cancer, big-mac, movies, etf-ranking or synthetic-etf")
      ->required();
  experiment->add_option("--k", f.k, "Neighbours for KNN (default 5, movies 20)");
  experiment->add_option("--k-sweep", f.k_sweep, "k values to sweep")->delimiter(',');
  experiment->add_option("--folds", f.folds, "Cross-validation folds");
  experiment->add_option("--users", f.users, "Movie raters to subsample (0: all)");
  experiment->add_option("--movies", f.movies, "Keep only the N most-rated movies (0: all)");
  experiment->add_option("--data", f.data, "Dataset file (ratings CSV for movies)");
  experiment->add_option("--corpus", f.corpus, "Movie metadata CSV");
  experiment->add_option("--data-dir", f.data_dir, "Directory holding the default dataset files");
  experiment->add_option("--holdings", f.holdings, "Holdings CSV (etf-ranking)");
  experiment->add_option("--matrix", f.matrix, "Constituent similarity matrix (etf-ranking)");
  experiment->add_option("--model", f.model, "Forest model JSON (etf-ranking)");
  experiment->add_option("--features", f.features, "Constituent features for --model");
  experiment->add_option("--returns", f.returns, "Return series CSV (etf-ranking)");
  experiment->add_option("--trees", f.forest_trees, "Trees per forest (synthetic-etf)");
  experiment->add_option("--depth", f.forest_depth, "Forest depth (synthetic-etf)");
  add_synthetic(experiment, f);

  auto* generate = app.add_subcommand("generate-synthetic", "Write a synthetic ETF universe");
  add_common(generate, f);
  add_synthetic(generate, f);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      report_error(json_errors, "UsageError", e.what(), 2);
      return 2;
    }

    if (!replay.empty()) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(ingest::read_file(replay));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, replay + ": " + e.what());
      }
      auto config = run_config_from_json(doc);
      if (!replay_out.empty()) config.out = replay_out;
      return execute_and_write(config);
    }
    CLI::App* chosen = nullptr;
    for (auto* sub : {similarity, proximity, experiment, generate}) {
      if (sub->parsed()) chosen = sub;
    }
    if (!chosen) {
      report_error(json_errors, "UsageError", "a subcommand is required\n" + app.help(), 2);
      return 2;
    }
    return execute_and_write(to_config(chosen->get_name(), f));
  } catch (const Error& e) {
    const int code = is_validation_error(e.code()) ? 2 : 1;
    report_error(json_errors, to_string(e.code()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    report_error(json_errors, "Internal", e.what(), 1);
    return 1;
  }
}

}  // namespace strapsim::cli
