#pragma once

// Feature scaling, weight learning from team vectors, and the weight-model
// file format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "playerank/error.hpp"
#include "playerank/features.hpp"
#include "playerank/linear_svm.hpp"

namespace playerank {

struct FeatureRange {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const FeatureRange&) const = default;
};

/// Per-feature min-max scaling to [0, 1]. Counts outside the fitted range are
/// clamped; unknown features scale to 0. The identity variant passes counts
/// through unchanged.
class FeatureScaler {
 public:
  enum class Kind { kMinMax, kIdentity };

  FeatureScaler() = default;

  static FeatureScaler identity() {
    FeatureScaler s;
    s.kind_ = Kind::kIdentity;
    return s;
  }

  Kind kind() const noexcept { return kind_; }
  const std::map<FeatureKey, FeatureRange>& ranges() const noexcept { return ranges_; }
  void set_range(const FeatureKey& key, FeatureRange r) { ranges_[key] = r; }

  double scale(const FeatureKey& key, double count) const {
    if (kind_ == Kind::kIdentity) return count;
    auto it = ranges_.find(key);
    if (it == ranges_.end()) return 0.0;
    const auto [lo, hi] = it->second;
    if (!(hi > lo)) return 0.0;
    return std::clamp((count - lo) / (hi - lo), 0.0, 1.0);
  }

  bool operator==(const FeatureScaler&) const = default;

 private:
  Kind kind_ = Kind::kMinMax;
  std::map<FeatureKey, FeatureRange> ranges_;
};

/// Min/max over rows, absent keys counting as 0.
inline FeatureScaler fit_scaler(const std::vector<PerformanceVector>& rows) {
  if (rows.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "cannot fit scaler on no rows");
  std::map<FeatureKey, std::size_t> present;
  std::map<FeatureKey, FeatureRange> ranges;
  for (const auto& r : rows) {
    for (const auto& [k, c] : r.entries()) {
      const double v = static_cast<double>(c);
      auto [it, fresh] = ranges.try_emplace(k, FeatureRange{v, v});
      if (!fresh) {
        it->second.min = std::min(it->second.min, v);
        it->second.max = std::max(it->second.max, v);
      }
      ++present[k];
    }
  }
  FeatureScaler s;
  for (auto& [k, r] : ranges) {
    if (present[k] < rows.size()) r.min = std::min(r.min, 0.0);
    s.set_range(k, r);
  }
  return s;
}

struct TrainConfig {
  double C = 1.0;
  double tolerance = 1e-6;
  int max_epochs = 1000;
  std::uint64_t seed = 0;

  bool operator==(const TrainConfig&) const = default;
};

/// Diagnostics recorded alongside the trained weights.
struct TrainStats {
  double raw_norm = 0.0;
  double objective = 0.0;
  long iterations = 0;
  bool converged = false;
  std::size_t rows = 0;

  bool operator==(const TrainStats&) const = default;
};

struct WeightModel {
  std::map<FeatureKey, double> weights;
  double intercept = 0.0;
  FeatureScaler scaler;
  std::set<std::string> ablation;
  TrainConfig config;
  TrainStats stats;

  double weight(const FeatureKey& k) const {
    auto it = weights.find(k);
    return it == weights.end() ? 0.0 : it->second;
  }

  bool operator==(const WeightModel&) const = default;
};

/// Builds the dense scaled design matrix. Feature order is the key order of
/// `features`.
inline svm::Problem scaled_problem(const std::vector<TrainingRow>& rows,
                                   const std::vector<FeatureKey>& features,
                                   const FeatureScaler& scaler) {
  svm::Problem p;
  p.dim = features.size();
  p.x.assign(rows.size() * p.dim, 0.0);
  p.y.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < features.size(); ++k) {
      const long c = rows[i].vector.count(features[k]);
      if (c != 0) p.x[i * p.dim + k] = scaler.scale(features[k], static_cast<double>(c));
    }
    p.y.push_back(rows[i].label);
  }
  return p;
}

/// Sorted union of the features present in `rows`.
inline std::vector<FeatureKey> feature_list(const std::vector<TrainingRow>& rows) {
  std::set<FeatureKey> keys;
  for (const auto& r : rows) {
    for (const auto& [k, c] : r.vector.entries()) keys.insert(k);
  }
  return {keys.begin(), keys.end()};
}

/// Trains on rows scaled with `scaler`; stored weights have unit L2 norm.
inline WeightModel train(const std::vector<TrainingRow>& rows, const FeatureScaler& scaler,
                         const TrainConfig& config = {}) {
  if (!(config.C > 0.0) || !(config.tolerance > 0.0) || config.max_epochs <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "C, tolerance and max_epochs must be positive");
  }
  if (rows.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "no training rows");
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& r : rows) {
    if (r.label == 1) has_pos = true;
    else if (r.label == -1) has_neg = true;
    else throw Error(ErrorCode::kInvalidArgument, "labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::kDegenerateData, "training rows contain a single class");
  }

  const auto features = feature_list(rows);
  const auto problem = scaled_problem(rows, features, scaler);
  bool all_same = true;
  for (std::size_t i = 1; i < problem.rows() && all_same; ++i) {
    all_same = std::equal(problem.row(i).begin(), problem.row(i).end(), problem.row(0).begin());
  }
  if (all_same) throw Error(ErrorCode::kDegenerateData, "all scaled vectors are identical");

  const long max_iter = static_cast<long>(config.max_epochs) * static_cast<long>(rows.size());
  const auto sol = svm::solve(problem, config.C, config.tolerance, max_iter);
  const double norm = std::sqrt(svm::dot(sol.w, sol.w));
  if (!(norm > 1e-12)) {
    throw Error(ErrorCode::kDegenerateData, "optimal weight vector is zero");
  }

  WeightModel m;
  m.scaler = scaler;
  m.config = config;
  for (std::size_t k = 0; k < features.size(); ++k) m.weights[features[k]] = sol.w[k] / norm;
  m.intercept = sol.b / norm;
  m.stats.raw_norm = norm;
  m.stats.objective = svm::hinge_objective(sol.w, sol.b, problem, config.C);
  m.stats.iterations = sol.iterations;
  m.stats.converged = sol.converged;
  m.stats.rows = rows.size();
  return m;
}

inline WeightModel train(const std::vector<TrainingRow>& rows, const TrainConfig& config = {}) {
  std::vector<PerformanceVector> vectors;
  vectors.reserve(rows.size());
  for (const auto& r : rows) vectors.push_back(r.vector);
  return train(rows, fit_scaler(vectors), config);
}

inline WeightModel train_ablated(const std::vector<MatchRecord>& corpus,
                                 const std::set<std::string>& ablation,
                                 const TrainConfig& config = {}) {
  auto m = train(build_training_set(corpus, ablation), config);
  m.ablation = ablation;
  return m;
}

using WeightList = std::vector<std::pair<FeatureKey, double>>;

/// Top-k by weight in each direction; ties broken by key order.
inline std::pair<WeightList, WeightList> top_weights(const WeightModel& model, std::size_t k) {
  if (k == 0 || k > model.weights.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "k must be in [1, " + std::to_string(model.weights.size()) + "]");
  }
  WeightList all(model.weights.begin(), model.weights.end());
  WeightList pos = all;
  std::stable_sort(pos.begin(), pos.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  WeightList neg = std::move(all);
  std::stable_sort(neg.begin(), neg.end(),
                   [](const auto& a, const auto& b) { return a.second < b.second; });
  pos.resize(k);
  neg.resize(k);
  return {std::move(pos), std::move(neg)};
}

// ---------------------------------------------------------------------------
// Weight-model file.

inline constexpr int kModelFormatVersion = 1;

inline nlohmann::json model_to_json(const WeightModel& m) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  auto& w = j["weights"] = nlohmann::json::object();
  for (const auto& [k, v] : m.weights) w[k.str()] = v;
  j["intercept"] = m.intercept;
  auto& s = j["scaler"] = nlohmann::json::object();
  for (const auto& [k, r] : m.scaler.ranges()) s[k.str()] = {{"min", r.min}, {"max", r.max}};
  j["scaling"] = m.scaler.kind() == FeatureScaler::Kind::kIdentity ? "identity" : "minmax";
  j["ablation"] = m.ablation;
  j["config"] = {
      {"C", m.config.C},
      {"tolerance", m.config.tolerance},
      {"max_epochs", m.config.max_epochs},
      {"seed", m.config.seed},
      {"raw_norm", m.stats.raw_norm},
      {"objective", m.stats.objective},
      {"iterations", m.stats.iterations},
      {"converged", m.stats.converged},
      {"rows", m.stats.rows},
  };
  return j;
}

inline WeightModel model_from_json(const nlohmann::json& j) {
  auto bad = [](const std::string& what) -> Error {
    return Error(ErrorCode::kMalformedLine, "weight model: " + what);
  };
  if (!j.is_object()) throw bad("not an object");
  if (j.value("format_version", 0) != kModelFormatVersion) throw bad("unsupported format_version");
  WeightModel m;
  try {
    for (const auto& [k, v] : j.at("weights").items()) m.weights[FeatureKey(k)] = v.get<double>();
    m.intercept = j.value("intercept", 0.0);
    const auto scaling = j.value("scaling", std::string("minmax"));
    if (scaling == "identity") {
      m.scaler = FeatureScaler::identity();
    } else if (scaling != "minmax") {
      throw bad("unknown scaling " + scaling);
    }
    if (auto it = j.find("scaler"); it != j.end()) {
      for (const auto& [k, r] : it->items()) {
        FeatureRange range{r.at("min").get<double>(), r.at("max").get<double>()};
        if (range.max < range.min) throw bad("scaler max < min for " + k);
        m.scaler.set_range(FeatureKey(k), range);
      }
    }
    if (auto it = j.find("ablation"); it != j.end()) {
      m.ablation = it->get<std::set<std::string>>();
    }
    if (auto it = j.find("config"); it != j.end()) {
      const auto& c = *it;
      m.config.C = c.value("C", m.config.C);
      m.config.tolerance = c.value("tolerance", m.config.tolerance);
      m.config.max_epochs = c.value("max_epochs", m.config.max_epochs);
      m.config.seed = c.value("seed", m.config.seed);
      m.stats.raw_norm = c.value("raw_norm", 0.0);
      m.stats.objective = c.value("objective", 0.0);
      m.stats.iterations = c.value("iterations", 0L);
      m.stats.converged = c.value("converged", false);
      m.stats.rows = c.value("rows", std::size_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw bad(e.what());
  }
  return m;
}

inline void write_model(std::ostream& os, const WeightModel& m) {
  os << model_to_json(m).dump(2) << '\n';
}

inline WeightModel read_model(std::istream& in) {
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kMalformedLine, "weight model: invalid JSON");
  return model_from_json(j);
}

}  // namespace playerank
