// Copyright 2026 The tokexp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tokexp/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tokexp/corpus.hpp"
#include "tokexp/cutoff.hpp"
#include "tokexp/error.hpp"
#include "tokexp/filters.hpp"
#include "tokexp/jsonl.hpp"
#include "tokexp/metrics.hpp"
#include "tokexp/predictor.hpp"
#include "tokexp/retrieval.hpp"
#include "tokexp/synthetic.hpp"
#include "tokexp/targets.hpp"

namespace tokexp::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

constexpr std::string_view kToolVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Provenance and output helpers.

Json resolved_config(const CLI::App& sub) {
  Json options = Json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help") continue;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      if (results.size() == 1) {
        options[name] = results.front();
      } else {
        options[name] = results;
      }
    } else {
      options[name] = opt->get_default_str();
    }
  }
  return {{"subcommand", sub.get_name()},
          {"tool_version", std::string(kToolVersion)},
          {"options", options}};
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
}

void ensure_parent(const std::string& path) {
  fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) ensure_dir(parent.string());
}

std::string join_path(const std::string& dir, std::string_view name) {
  return (fs::path(dir) / std::string(name)).string();
}

void require_file(const std::string& path) {
  if (!fs::is_regular_file(path)) throw InputError("input file not found: " + path);
}

void require_distinct(const std::string& output,
                      std::initializer_list<std::string> inputs) {
  for (const auto& in : inputs) {
    if (in.empty()) continue;
    std::error_code ec;
    if (fs::exists(output) && fs::exists(in) && fs::equivalent(output, in, ec)) {
      throw ConfigError("output " + output + " would overwrite input " + in);
    }
  }
}

void write_jsonl(const std::string& path, const Json& config,
                 const std::function<void(std::ostream&)>& body) {
  ensure_parent(path);
  std::ostringstream out;
  io::write_meta(out, config);
  body(out);
  io::write_file(path, out.str());
}

// Writes `path` (JSON) and `path`.txt (a human-readable table). Both carry
// the resolved config.
void write_report(const std::string& path, const Json& config, Json body,
                  const std::string& table) {
  ensure_parent(path);
  body["config"] = config;
  io::write_file(path, body.dump(2) + "\n");
  io::write_file(path + ".txt", "# config: " + config.dump() + "\n" + table);
}

Json read_json(const std::string& path) {
  std::string text = io::read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": malformed JSON: " + e.what());
  }
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string table2_header() {
  return "label                      cutoff | ROUGE P     R    F1 | nROUGE P     R    F1 |  Total  Novel     %\n";
}

std::string table2_row(const std::string& label, double cutoff, const Json& m) {
  std::string row = label;
  row.resize(std::max<std::size_t>(row.size(), 26), ' ');
  row += fmt(" %6.2f |", cutoff);
  row += fmt("   %5.3f", m.at("rouge_precision").get<double>());
  row += fmt(" %5.3f", m.at("rouge_recall").get<double>());
  row += fmt(" %5.3f |", m.at("rouge_f1").get<double>());
  row += fmt("    %5.3f", m.at("nrouge_precision").get<double>());
  row += fmt(" %5.3f", m.at("nrouge_recall").get<double>());
  row += fmt(" %5.3f |", m.at("nrouge_f1").get<double>());
  row += fmt(" %6.1f", m.at("total_tokens").get<double>());
  row += fmt(" %6.1f", m.at("novel_tokens").get<double>());
  row += m.at("novel_pct_undefined").get<bool>() ? "     -"
                                                  : fmt(" %5.0f", m.at("novel_pct").get<double>());
  return row + "\n";
}

std::string intervals_table(const Json& m) {
  std::string out;
  for (const auto& [name, iv] : m.at("intervals").items()) {
    out += "  " + name + " CI: (" + fmt("%.4f", iv.at(0).get<double>()) + ", " +
           fmt("%.4f", iv.at(1).get<double>()) + ")\n";
  }
  return out;
}

std::string stats_table(const Json& rows) {
  PipelineStats stats;
  for (const auto& r : rows) {
    StageStats s;
    s.stage = r.at("stage").get<std::string>();
    s.pairs_in = r.at("pairs_in").get<std::size_t>();
    s.pairs_out = r.at("pairs_out").get<std::size_t>();
    s.products_out = r.at("products_out").get<std::size_t>();
    s.product_token_pairs = r.at("product_token_pairs").get<std::size_t>();
    stats.stages.push_back(s);
  }
  return stats.to_table();
}

std::vector<double> parse_doubles(const std::string& csv, std::size_t expected,
                                  const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("invalid " + what + ": " + csv);
    }
  }
  if (out.size() != expected) {
    throw ConfigError(what + " needs " + std::to_string(expected) + " values: " + csv);
  }
  return out;
}

Expansions expansions_from(const ExternalPredictions& preds, double cutoff) {
  Expansions out;
  for (const auto& id : preds.product_ids()) {
    auto kept = apply_cutoff(preds.predict(id, std::numeric_limits<std::size_t>::max()),
                             cutoff);
    if (kept.empty()) continue;
    auto& tokens = out[id];
    for (const auto& p : kept) tokens.push_back(p.token);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config file handling.

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(t.substr(0, eq));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    if (key.empty()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
    }
    entries.emplace_back(key, trim(t.substr(eq + 1)));
  }
  return entries;
}

bool flag_given(std::span<const std::string> args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Subcommands.

struct Common {
  int threads = 1;
};

void add_common(CLI::App* sub, Common& common) {
  sub->add_option("--threads", common.threads, "Upper bound on worker threads")
      ->check(CLI::PositiveNumber);
}

void setup_ingest(CLI::App& app, std::ostream& out, std::ostream& err) {
  struct Opts {
    Common common;
    std::string products, engagement, out_dir, ratios = "8,1,1", on_unknown = "skip";
    std::int64_t min_atc = kDefaultMinAtc;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("ingest", "Load products and engagement, split by product");
  sub->add_option("--products", o->products, "Product JSON-lines file")->required();
  sub->add_option("--engagement", o->engagement, "Engagement JSON-lines file")->required();
  sub->add_option("--min-atc", o->min_atc, "Minimum add-to-cart count")->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", o->seed, "Split seed");
  sub->add_option("--ratios", o->ratios, "train,validation,test ratios");
  sub->add_option("--on-unknown", o->on_unknown, "Unknown product references: skip|error")
      ->check(CLI::IsMember({"skip", "error"}));
  sub->add_option("--out", o->out_dir, "Output directory")->required();
  add_common(sub, o->common);
  sub->callback([o, sub, &out, &err] {
    Json config = resolved_config(*sub);
    auto r = parse_doubles(o->ratios, 3, "split ratios");
    require_file(o->products);
    require_file(o->engagement);
    Catalog catalog(load_products_file(o->products));
    auto policy = o->on_unknown == "error" ? UnknownProductPolicy::kError
                                           : UnknownProductPolicy::kSkipWithWarning;
    EngagementLoad load = load_engagement_file(o->engagement, o->min_atc, &catalog, policy);
    for (const auto& w : load.warnings) err << "warning: " << w << '\n';
    std::vector<std::string> ids;
    for (const auto& p : catalog.products()) ids.push_back(p.id);
    CatalogSplit split = split_by_product(ids, {r[0], r[1], r[2]}, o->seed);

    ensure_dir(o->out_dir);
    require_distinct(join_path(o->out_dir, "products.jsonl"), {o->products});
    require_distinct(join_path(o->out_dir, "engagement.jsonl"), {o->engagement});
    write_jsonl(join_path(o->out_dir, "products.jsonl"), config,
                [&](std::ostream& s) { write_products(s, catalog.products()); });
    write_jsonl(join_path(o->out_dir, "engagement.jsonl"), config,
                [&](std::ostream& s) { write_engagement(s, load.pairs); });
    write_jsonl(join_path(o->out_dir, "split.jsonl"), config,
                [&](std::ostream& s) { write_split(s, split); });
    Json body = {{"products", catalog.size()},
                 {"pairs_kept", load.pairs.size()},
                 {"dropped_below_min_atc", load.dropped_below_min_atc},
                 {"skipped_unknown_product", load.skipped_unknown_product},
                 {"split", {{"train", split.train.size()},
                            {"validation", split.validation.size()},
                            {"test", split.test.size()}}}};
    std::ostringstream table;
    table << "products " << catalog.size() << "\npairs kept " << load.pairs.size()
          << "\ndropped below min_atc " << load.dropped_below_min_atc
          << "\nskipped unknown product " << load.skipped_unknown_product
          << "\nsplit train/validation/test " << split.train.size() << "/"
          << split.validation.size() << "/" << split.test.size() << '\n';
    write_report(join_path(o->out_dir, "ingest_report.json"), config, body, table.str());
    out << table.str();
  });
}

void setup_filter(CLI::App& app, std::ostream& out) {
  struct Opts {
    Common common;
    std::string in_dir, out_dir, scorer = "jaccard", scores, price_patterns;
    double rf_threshold = 0.0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("filter", "Run the RF/PTF/FMF/OTF preprocessing chain");
  sub->add_option("--in", o->in_dir, "Directory written by ingest")->required();
  sub->add_option("--scorer", o->scorer, "Relevance scorer: jaccard|external")
      ->check(CLI::IsMember({"jaccard", "external"}));
  sub->add_option("--scores", o->scores, "Precomputed relevance scores for --scorer external");
  sub->add_option("--rf-threshold", o->rf_threshold, "Relevance threshold")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--price-patterns", o->price_patterns,
                  "File with one price/deal regex per line (replaces the defaults)");
  sub->add_option("--out", o->out_dir, "Output directory")->required();
  add_common(sub, o->common);
  sub->callback([o, sub, &out] {
    Json config = resolved_config(*sub);
    if (fs::exists(o->out_dir) && fs::exists(o->in_dir) &&
        fs::equivalent(o->out_dir, o->in_dir)) {
      throw ConfigError("filter --out must differ from --in");
    }
    const std::string products_path = join_path(o->in_dir, "products.jsonl");
    const std::string split_path = join_path(o->in_dir, "split.jsonl");
    for (const auto& p : {products_path, split_path, join_path(o->in_dir, "engagement.jsonl")}) {
      require_file(p);
    }
    Catalog catalog(load_products_file(products_path));
    CatalogSplit split = load_split_file(split_path);
    EngagementLoad load = load_engagement_file(join_path(o->in_dir, "engagement.jsonl"), 0,
                                               &catalog, UnknownProductPolicy::kError);

    PipelineConfig pc;
    pc.rf_threshold = o->rf_threshold;
    if (o->scorer == "external") {
      if (o->scores.empty()) throw ConfigError("--scorer external requires --scores");
      require_file(o->scores);
      pc.scorer = std::make_shared<ExternalScoreTable>(ExternalScoreTable::load(o->scores));
    }
    if (!o->price_patterns.empty()) {
      std::ifstream in(o->price_patterns);
      if (!in) throw InputError("cannot open price pattern file: " + o->price_patterns);
      std::vector<std::string> patterns;
      std::string line;
      while (std::getline(in, line)) {
        std::string t = trim(line);
        if (!t.empty() && t[0] != '#') patterns.push_back(t);
      }
      pc.price_filter = PriceFilter(patterns);
    }
    PipelineResult result = run_pipeline(load.pairs, catalog, pc);

    ensure_dir(o->out_dir);
    write_jsonl(join_path(o->out_dir, "products.jsonl"), config,
                [&](std::ostream& s) { write_products(s, catalog.products()); });
    write_jsonl(join_path(o->out_dir, "split.jsonl"), config,
                [&](std::ostream& s) { write_split(s, split); });
    write_jsonl(join_path(o->out_dir, "query_pairs.jsonl"), config, [&](std::ostream& s) {
      for (const auto& p : result.query_dataset) {
        io::write_line(s, {{"product_id", p.product_id},
                           {"query", p.query},
                           {"atc_count", p.atc_count},
                           {"split", split_name(split.split_of(p.product_id))}});
      }
    });
    write_jsonl(join_path(o->out_dir, "novel_pairs.jsonl"), config,
                [&](std::ostream& s) { write_novel_pairs(s, result.token_dataset); });
    for (Split which : {Split::kValidation, Split::kTest}) {
      std::string name = "references_" + std::string(split_name(which)) + ".jsonl";
      write_jsonl(join_path(o->out_dir, name), config, [&](std::ostream& s) {
        for (const auto& p : result.query_dataset) {
          if (!split.contains(which, p.product_id)) continue;
          io::write_line(s, {{"product_id", p.product_id}, {"query", p.query}});
        }
      });
    }
    std::string table = result.stats.to_table();
    write_report(join_path(o->out_dir, "stats.json"), config,
                 {{"stages", result.stats.to_json()}}, table);
    out << table;
  });
}

void setup_build_targets(CLI::App& app, std::ostream& out) {
  struct Opts {
    Common common;
    std::string in_dir, out_path, split = "train";
    double alpha = 0.5;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("build-targets", "Build weighted novel-token training instances");
  sub->add_option("--in", o->in_dir, "Directory written by filter")->required();
  sub->add_option("--alpha", o->alpha, "Frequency smoothing exponent")->check(CLI::NonNegativeNumber);
  sub->add_option("--split", o->split, "train|validation|test|all")
      ->check(CLI::IsMember({"train", "validation", "test", "all"}));
  sub->add_option("--out", o->out_path, "Training export file")->required();
  add_common(sub, o->common);
  sub->callback([o, sub, &out] {
    Json config = resolved_config(*sub);
    const std::string products_path = join_path(o->in_dir, "products.jsonl");
    const std::string novel_path = join_path(o->in_dir, "novel_pairs.jsonl");
    const std::string split_path = join_path(o->in_dir, "split.jsonl");
    for (const auto& p : {products_path, novel_path, split_path}) require_file(p);
    Catalog catalog(load_products_file(products_path));
    auto novel = load_novel_pairs_file(novel_path);
    std::vector<std::string> ids;
    if (o->split == "all") {
      for (const auto& p : catalog.products()) ids.push_back(p.id);
    } else {
      ids = load_split_file(split_path).ids(parse_split(o->split));
    }
    if (ids.empty()) throw InputError("no products in split " + o->split);
    auto instances = build_training_set(catalog, novel, ids, {o->alpha});
    write_jsonl(o->out_path, config,
                [&](std::ostream& s) { write_training_instances(s, instances); });
    out << "training instances " << instances.size() << '\n';
  });
}

void setup_train(CLI::App& app, std::ostream& out) {
  struct Opts {
    Common common;
    std::string targets, products, out_path;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("train", "Train the co-occurrence reference predictor");
  sub->add_option("--targets", o->targets, "Training export from build-targets")->required();
  sub->add_option("--products", o->products, "Product file")->required();
  sub->add_option("--out", o->out_path, "Model file")->required();
  add_common(sub, o->common);
  sub->callback([o, sub, &out] {
    Json config = resolved_config(*sub);
    require_file(o->targets);
    require_file(o->products);
    require_distinct(o->out_path, {o->targets, o->products});
    Catalog catalog(load_products_file(o->products));
    auto instances = load_training_instances_file(o->targets);
    CooccurrenceModel model = train_cooccurrence(instances, catalog);
    write_jsonl(o->out_path, config, [&](std::ostream& s) { model.save(s); });
    out << "contexts " << model.marginals().size() << ", targets "
        << model.vocabulary().size() << '\n';
  });
}

std::unique_ptr<TokenPredictor> load_predictor(const std::string& spec) {
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::string path = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (path.empty()) throw ConfigError("--model needs KIND:PATH, got: " + spec);
  require_file(path);
  if (kind == "cooccurrence") {
    return std::make_unique<CooccurrenceModel>(CooccurrenceModel::load_file(path));
  }
  if (kind == "external") {
    return std::make_unique<ExternalPredictions>(load_external_predictions(path));
  }
  throw ConfigError("unknown model kind: " + kind);
}

void setup_predict(CLI::App& app, std::ostream& out) {
  struct Opts {
    Common common;
    std::string model, products, out_path, split_file, split;
    std::size_t top = 10;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("predict", "Predict scored novel tokens per product");
  sub->add_option("--model", o->model, "cooccurrence:MODEL_PATH or external:PREDICTIONS_PATH")
      ->required();
  sub->add_option("--products", o->products, "Product file")->required();
  sub->add_option("--top", o->top, "Predictions per product")->check(CLI::PositiveNumber);
  sub->add_option("--split-file", o->split_file, "Restrict to one split of this split file");
  sub->add_option("--split", o->split, "Split name used with --split-file");
  sub->add_option("--out", o->out_path, "Prediction file")->required();
  add_common(sub, o->common);
  sub->callback([o, sub, &out] {
    Json config = resolved_config(*sub);
    require_file(o->products);
    Catalog catalog(load_products_file(o->products));
    auto predictor = load_predictor(o->model);
    std::optional<CatalogSplit> split;
    if (!o->split_file.empty()) {
      if (o->split.empty()) throw ConfigError("--split-file requires --split");
      require_file(o->split_file);
      split = load_split_file(o->split_file);
    }
    std::vector<std::pair<std::string, std::vector<ScoredToken>>> rows;
    for (const auto& p : catalog.products()) {
      if (split && !split->contains(parse_split(o->split), p.id)) continue;
      auto preds = predictor->predict(p, o->top);
      if (!preds.empty()) rows.emplace_back(p.id, std::move(preds));
    }
    require_distinct(o->out_path, {o->products});
    write_jsonl(o->out_path, config, [&](std::ostream& s) { write_predictions(s, rows); });
    out << "products with predictions " << rows.size() << '\n';
  });
}

struct EvalInputs {
  Catalog catalog;
  std::vector<EvalCase> cases;
};

EvalInputs load_eval_inputs(const std::string& predictions, const std::string& references,
                            const std::string& products, std::size_t top) {
  for (const auto& p : {predictions, references, products}) require_file(p);
  EvalInputs in{Catalog(load_products_file(products)), {}};
  ExternalPredictions preds = load_external_predictions(predictions);
  auto refs = load_references_file(references);
  in.cases = build_eval_cases(in.catalog, refs, preds, top);
  return in;
}

TokenLookup lookup_for(const Catalog& catalog) {
  return [&catalog](std::string_view id) -> const TokenSet& { return catalog.tokens(id); };
}

void setup_evaluate(CLI::App& app, std::ostream& out) {
  struct Opts {
    Common common;
    std::string predictions, references, products, report, f1_mode = "per-product";
    double cutoff = 0.0, level = 0.95;
    std::size_t bootstrap = 1000, top = 10;
    std::uint64_t seed = 0;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("evaluate", "ROUGE / nROUGE evaluation at a fixed cutoff");
  sub->add_option("--predictions", o->predictions, "Prediction file")->required();
  sub->add_option("--references", o->references, "Reference queries {product_id, query}")
      ->required();
  sub->add_option("--products", o->products, "Product file")->required();
  sub->add_option("--cutoff", o->cutoff, "Keep predictions scoring above this");
  sub->add_option("--top", o->top, "Predictions per product")->check(CLI::PositiveNumber);
  sub->add_option("--bootstrap", o->bootstrap, "Bootstrap resamples (0 disables)");
  sub->add_option("--level", o->level, "Interval level")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--seed", o->seed, "Bootstrap seed")->required();
  sub->add_option("--f1-mode", o->f1_mode, "per-product|corpus")
      ->check(CLI::IsMember({"per-product", "corpus"}));
  sub->add_option("--report", o->report, "Report file")->required();
  add_common(sub, o->common);
  sub->callback([o, sub, &out] {
    Json config = resolved_config(*sub);
    if (!(o->level > 0.0 && o->level < 1.0)) throw ConfigError("--level must be in (0, 1)");
    EvalInputs in = load_eval_inputs(o->predictions, o->references, o->products, o->top);
    auto records = apply_cutoff(in.cases, o->cutoff);
    ReportOptions ro;
    ro.f1_mode = o->f1_mode == "corpus" ? F1Mode::kFromCorpusMeans : F1Mode::kPerProduct;
    ro.bootstrap_resamples = o->bootstrap;
    ro.level = o->level;
    ro.seed = o->seed;
    MetricsReport report = compute_report(records, lookup_for(in.catalog), ro);
    Json metrics = report.to_json();
    std::string label = fs::path(o->predictions).stem().string();
    std::string table = table2_header() + table2_row(label, o->cutoff, metrics) +
                        intervals_table(metrics);
    write_report(o->report, config,
                 {{"label", label}, {"cutoff", o->cutoff}, {"metrics", metrics}}, table);
    out << table;
  });
}

void setup_tune_cutoff(CLI::App& app, std::ostream& out) {
  struct Opts {
    Common common;
    std::string predictions, references, products, report, grid = "observed";
    std::size_t top = 10;
    std::optional<double> budget;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("tune-cutoff", "Choose the cutoff maximizing nROUGE F1");
  sub->add_option("--predictions", o->predictions, "Prediction file")->required();
  sub->add_option("--references", o->references, "Validation reference queries")->required();
  sub->add_option("--products", o->products, "Product file")->required();
  sub->add_option("--grid", o->grid, "observed|step:X");
  sub->add_option("--top", o->top, "Predictions per product")->check(CLI::PositiveNumber);
  sub->add_option("--budget", o->budget, "Also report the cutoff matching this mean novel-token count");
  sub->add_option("--report", o->report, "Report file")->required();
  add_common(sub, o->common);
  sub->callback([o, sub, &out] {
    Json config = resolved_config(*sub);
    CutoffGrid grid = CutoffGrid::parse(o->grid);
    EvalInputs in = load_eval_inputs(o->predictions, o->references, o->products, o->top);
    CutoffSweepResult sweep = tune_cutoff(in.cases, lookup_for(in.catalog), grid);
    Json body = sweep.to_json();
    std::string label = fs::path(o->predictions).stem().string();
    std::string table = table2_header();
    for (const auto& row : sweep.rows) {
      std::string mark = row.cutoff == sweep.chosen ? label + " *" : label;
      table += table2_row(mark, row.cutoff, row.report.to_json());
    }
    body["label"] = label;
    body["chosen_metrics"] = sweep.chosen_row().report.to_json();
    if (o->budget) {
      BudgetMatch m = budget_match_cutoff(sweep.rows, *o->budget);
      body["budget"] = {{"target", *o->budget}, {"cutoff", m.cutoff},
                        {"unreachable", m.unreachable}};
      table += "budget " + fmt("%.2f", *o->budget) + " -> cutoff " + fmt("%.4f", m.cutoff) +
               (m.unreachable ? " (unreachable)" : "") + "\n";
    }
    table += "chosen cutoff " + fmt("%.6f", sweep.chosen) + "\n";
    write_report(o->report, config, body, table);
    out << "chosen cutoff " << fmt("%.6f", sweep.chosen) << " nrouge_f1 "
        << fmt("%.4f", sweep.chosen_row().report.nrouge_f1) << '\n';
  });
}

void setup_index(CLI::App& app, std::ostream& out) {
  struct Opts {
    Common common;
    std::string products, expansions, out_path, weights = "2,1,1,1";
    double cutoff = 0.0, k1 = 1.2, b = 0.75;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("index", "Build a BM25 index with an expansion field");
  sub->add_option("--products", o->products, "Product file")->required();
  sub->add_option("--expansions", o->expansions, "Prediction file used as expansion tokens");
  sub->add_option("--cutoff", o->cutoff, "Expansion score cutoff");
  sub->add_option("--weights", o->weights, "title,attributes,description,expansion weights");
  sub->add_option("--k1", o->k1, "BM25 k1")->check(CLI::NonNegativeNumber);
  sub->add_option("--b", o->b, "BM25 b")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--out", o->out_path, "Index file")->required();
  add_common(sub, o->common);
  sub->callback([o, sub, &out] {
    Json config = resolved_config(*sub);
    auto w = parse_doubles(o->weights, kIndexFieldCount, "field weights");
    FieldWeights weights;
    for (std::size_t i = 0; i < kIndexFieldCount; ++i) {
      if (w[i] < 0.0) throw ConfigError("field weights must be non-negative");
      weights.values[i] = w[i];
    }
    require_file(o->products);
    auto products = load_products_file(o->products);
    Expansions expansions;
    if (!o->expansions.empty()) {
      require_file(o->expansions);
      expansions = expansions_from(load_external_predictions(o->expansions), o->cutoff);
    }
    InvertedIndex index = InvertedIndex::build(products, expansions, weights, {o->k1, o->b});
    require_distinct(o->out_path, {o->products, o->expansions});
    ensure_parent(o->out_path);
    Json j = index.to_json();
    j["config"] = config;
    io::write_file(o->out_path, j.dump() + "\n");
    out << "documents " << index.document_count() << ", expanded " << expansions.size() << '\n';
  });
}

void setup_search(CLI::App& app, std::ostream& out) {
  struct Opts {
    Common common;
    std::string index, query;
    std::size_t k = 10;
    bool json = false;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("search", "Query an index");
  sub->add_option("--index", o->index, "Index file")->required();
  sub->add_option("--query", o->query, "Query text")->required();
  sub->add_option("--k", o->k, "Results")->check(CLI::PositiveNumber);
  sub->add_flag("--json", o->json, "Print JSON instead of a table");
  add_common(sub, o->common);
  sub->callback([o, sub, &out] {
    require_file(o->index);
    InvertedIndex index = InvertedIndex::load(o->index);
    SearchResult hits = search(index, o->query, o->k);
    if (o->json) {
      Json arr = Json::array();
      for (const auto& h : hits) arr.push_back({{"doc_id", h.doc_id}, {"score", h.score}});
      out << Json{{"config", resolved_config(*sub)}, {"hits", arr}}.dump() << '\n';
      return;
    }
    for (std::size_t i = 0; i < hits.size(); ++i) {
      out << (i + 1) << '\t' << hits[i].doc_id << '\t' << fmt("%.6f", hits[i].score) << '\n';
    }
  });
}

void setup_eval_retrieval(CLI::App& app, std::ostream& out) {
  struct Opts {
    Common common;
    std::string index, pairs, report;
    std::size_t k = 10;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("eval-retrieval", "Recall@k of query/product pairs");
  sub->add_option("--index", o->index, "Index file")->required();
  sub->add_option("--pairs", o->pairs, "Pairs file {product_id, query}")->required();
  sub->add_option("--k", o->k, "Cutoff rank")->check(CLI::PositiveNumber);
  sub->add_option("--report", o->report, "Report file")->required();
  add_common(sub, o->common);
  sub->callback([o, sub, &out] {
    Json config = resolved_config(*sub);
    require_file(o->index);
    require_file(o->pairs);
    InvertedIndex index = InvertedIndex::load(o->index);
    auto pairs = load_query_pairs_file(o->pairs);
    RecallResult r = eval_recall(index, pairs, o->k);
    Json body = {{"label", fs::path(o->index).stem().string()},
                 {"k", o->k},
                 {"recall", r.recall},
                 {"pairs", r.pairs},
                 {"hits", r.hits},
                 {"empty", r.empty}};
    std::string table = "recall@" + std::to_string(o->k) + " " + fmt("%.4f", r.recall) + " (" +
                        std::to_string(r.hits) + "/" + std::to_string(r.pairs) + ")" +
                        (r.empty ? " [no pairs]" : "") + "\n";
    write_report(o->report, config, body, table);
    out << table;
  });
}

void setup_report(CLI::App& app, std::ostream& out) {
  struct Opts {
    Common common;
    std::string stats, out_path;
    std::vector<std::string> evaluations, sweeps, retrievals;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("report", "Merge stage reports into one document");
  sub->add_option("--stats", o->stats, "stats.json from filter");
  sub->add_option("--evaluation", o->evaluations, "Reports from evaluate");
  sub->add_option("--sweep", o->sweeps, "Reports from tune-cutoff");
  sub->add_option("--retrieval", o->retrievals, "Reports from eval-retrieval");
  sub->add_option("--out", o->out_path, "Merged report file")->required();
  add_common(sub, o->common);
  sub->callback([o, sub, &out] {
    Json config = resolved_config(*sub);
    Json body = Json::object();
    std::string table;
    if (!o->stats.empty()) {
      Json stats = read_json(o->stats);
      body["preprocessing"] = stats.at("stages");
      table += "Preprocessing\n" + stats_table(stats.at("stages")) + "\n";
    }
    Json rows = Json::array();
    std::string t2;
    for (const auto& path : o->sweeps) {
      Json s = read_json(path);
      std::string label = s.at("label").get<std::string>() + " (tuned)";
      rows.push_back({{"label", label}, {"cutoff", s.at("chosen")},
                      {"metrics", s.at("chosen_metrics")}});
      t2 += table2_row(label, s.at("chosen").get<double>(), s.at("chosen_metrics"));
    }
    for (const auto& path : o->evaluations) {
      Json e = read_json(path);
      rows.push_back({{"label", e.at("label")}, {"cutoff", e.at("cutoff")},
                      {"metrics", e.at("metrics")}});
      t2 += table2_row(e.at("label").get<std::string>(), e.at("cutoff").get<double>(),
                       e.at("metrics"));
      t2 += intervals_table(e.at("metrics"));
    }
    if (!rows.empty()) {
      body["evaluation"] = rows;
      table += "Evaluation\n" + table2_header() + t2 + "\n";
    }
    Json retrieval = Json::array();
    for (const auto& path : o->retrievals) {
      Json r = read_json(path);
      retrieval.push_back({{"label", r.at("label")}, {"k", r.at("k")},
                           {"recall", r.at("recall")}, {"pairs", r.at("pairs")},
                           {"hits", r.at("hits")}});
      table += "recall@" + r.at("k").dump() + " " + r.at("label").get<std::string>() + " " +
               fmt("%.4f", r.at("recall").get<double>()) + "\n";
    }
    if (!retrieval.empty()) body["retrieval"] = retrieval;
    write_report(o->out_path, config, body, table);
    out << table;
  });
}

void setup_gen_synthetic(CLI::App& app, std::ostream& out) {
  struct Opts {
    Common common;
    std::string out_dir;
    SyntheticConfig sc;
  };
  auto o = std::make_shared<Opts>();
  auto* sub = app.add_subcommand("gen-synthetic", "Write the seeded synthetic vocabulary-gap corpus");
  sub->add_option("--seed", o->sc.seed, "Generator seed");
  sub->add_option("--products", o->sc.products, "Number of products")->check(CLI::PositiveNumber);
  sub->add_option("--heldout", o->sc.heldout_queries, "Held-out mismatch queries");
  sub->add_option("--out", o->out_dir, "Output directory")->required();
  add_common(sub, o->common);
  sub->callback([o, sub, &out] {
    Json config = resolved_config(*sub);
    SyntheticCorpus c = generate_synthetic(o->sc);
    ensure_dir(o->out_dir);
    write_jsonl(join_path(o->out_dir, "products.jsonl"), config,
                [&](std::ostream& s) { write_products(s, c.products); });
    write_jsonl(join_path(o->out_dir, "engagement.jsonl"), config,
                [&](std::ostream& s) { write_engagement(s, c.engagement); });
    write_jsonl(join_path(o->out_dir, "gold_expansions.jsonl"), config, [&](std::ostream& s) {
      for (const auto& [id, tokens] : c.gold) {
        for (const auto& t : tokens) {
          io::write_line(s, {{"product_id", id}, {"token", t}, {"score", 1.0}, {"kind", "token"}});
        }
      }
    });
    write_jsonl(join_path(o->out_dir, "heldout_queries.jsonl"), config, [&](std::ostream& s) {
      for (const auto& p : c.heldout) {
        io::write_line(s, {{"product_id", p.product_id}, {"query", p.query}});
      }
    });
    write_jsonl(join_path(o->out_dir, "baseline_predictions.jsonl"), config,
                [&](std::ostream& s) {
                  std::map<std::string, int> rank;
                  for (const auto& p : c.baseline_queries) {
                    int r = rank[p.product_id]++;
                    io::write_line(s, {{"product_id", p.product_id},
                                       {"query", p.query},
                                       {"score", r == 0 ? 0.9 : 0.6},
                                       {"kind", "query"}});
                  }
                });
    out << "products " << c.products.size() << ", engagement pairs " << c.engagement.size()
        << ", held-out queries " << c.heldout.size() << '\n';
  });
}

}  // namespace

int run(std::span<const std::string> args_in, std::ostream& out, std::ostream& err) {
  try {
    std::vector<std::string> args;
    std::string config_path;
    for (std::size_t i = 0; i < args_in.size(); ++i) {
      const std::string& a = args_in[i];
      if (a == "--config") {
        if (i + 1 >= args_in.size()) throw ConfigError("--config needs a path");
        config_path = args_in[++i];
      } else if (a.rfind("--config=", 0) == 0) {
        config_path = a.substr(9);
      } else {
        args.push_back(a);
      }
    }

    CLI::App app{"Novel-token document expansion toolkit", "tokexp"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    setup_ingest(app, out, err);
    setup_filter(app, out);
    setup_build_targets(app, out);
    setup_train(app, out);
    setup_predict(app, out);
    setup_evaluate(app, out);
    setup_tune_cutoff(app, out);
    setup_index(app, out);
    setup_search(app, out);
    setup_eval_retrieval(app, out);
    setup_report(app, out);
    setup_gen_synthetic(app, out);

    if (!config_path.empty()) {
      auto entries = read_config_file(config_path);
      CLI::App* sub = nullptr;
      if (!args.empty()) sub = app.get_subcommand_no_throw(args.front());
      if (sub == nullptr) throw ConfigError("--config requires a subcommand");
      for (const auto& [key, value] : entries) {
        bool known = false;
        for (CLI::App* s : app.get_subcommands({})) {
          if (s->get_option_no_throw("--" + key) != nullptr) known = true;
        }
        if (!known) throw ConfigError("unknown config key: " + key);
        if (sub->get_option_no_throw("--" + key) == nullptr) continue;
        if (flag_given(args, key)) continue;
        args.push_back("--" + key + "=" + value);
      }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        out << app.help();
        return 0;
      }
      err << "error: " << e.what() << '\n';
      return static_cast<int>(ErrorKind::kConfig);
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::kInternal);
  }
}

}  // namespace tokexp::cli
