#include "mlr/ensemble.hpp"

#include <algorithm>
#include <numeric>

#include "mlr/parallel.hpp"

namespace mlr {

EnsembleSpec EnsembleSpec::single(int depth) { return {EnsembleKind::Single, {depth}}; }

EnsembleSpec EnsembleSpec::bag(int depth, std::size_t members) {
  return {EnsembleKind::Bag, std::vector<int>(members, depth)};
}

EnsembleSpec EnsembleSpec::pool(EnsembleKind kind) {
  EnsembleSpec s{kind, std::vector<int>(10, 1)};
  s.depths.insert(s.depths.end(), 10, 2);
  return s;
}

EnsembleSpec EnsembleSpec::parse(const std::string& name, int depth) {
  if (name == "single") return single(depth);
  if (name == "bag") return bag(depth);
  if (name.size() == 4 && name.starts_with("bag") && name[3] >= '1' && name[3] <= '4') return bag(name[3] - '0');
  if (name == "ens") return pool(EnsembleKind::Ens);
  if (name == "best") return pool(EnsembleKind::Best);
  if (name == "top5") return pool(EnsembleKind::Top5);
  throw Error(ErrorCode::InvalidConfig, "unknown ensemble '" + name + "'");
}

std::size_t Ensemble::healthy() const {
  return static_cast<std::size_t>(std::count_if(members.begin(), members.end(), [](const Member& m) { return !m.failed; }));
}

Ensemble train_ensemble(const EnsembleSpec& spec, const MlrConfig& base, const Matrix& x, const Matrix& y,
                        std::uint64_t master_seed, std::size_t workers) {
  if (spec.depths.empty()) throw Error(ErrorCode::EmptyEnsemble, "ensemble spec has no members");
  Ensemble ens;
  ens.kind = spec.kind;
  ens.task = base.task;
  ens.members.resize(spec.depths.size());
  parallel_for(spec.depths.size(), static_cast<int>(workers), [&](std::size_t i) {
    Member& m = ens.members[i];
    m.seed = master_seed + i;
    m.depth = spec.depths[i];
    MlrConfig cfg = base;
    if (m.depth != cfg.depth) cfg.apply_depth_defaults(m.depth);
    try {
      m.result = train(cfg, x, y, m.seed);
    } catch (const std::exception& e) {
      m.failed = true;
      m.error = e.what();
    }
  });
  const std::size_t failed = ens.members.size() - ens.healthy();
  if (2 * failed > ens.members.size()) {
    std::string first;
    for (const auto& m : ens.members) {
      if (m.failed) {
        first = m.error;
        break;
      }
    }
    throw Error(ErrorCode::EnsembleFailed, std::to_string(failed) + " of " + std::to_string(ens.members.size()) +
                                               " members failed; first: " + first);
  }
  return ens;
}

std::vector<std::size_t> selected_members(std::span<const double> validation_scores, EnsembleKind kind) {
  if (validation_scores.empty()) throw Error(ErrorCode::EmptyEnsemble, "no members to select from");
  std::vector<std::size_t> idx(validation_scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (kind == EnsembleKind::Single || kind == EnsembleKind::Bag || kind == EnsembleKind::Ens) return idx;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return validation_scores[a] > validation_scores[b]; });
  idx.resize(std::min<std::size_t>(idx.size(), kind == EnsembleKind::Best ? 1 : 5));
  return idx;
}

Matrix aggregate_predictions(std::span<const Matrix> member_scores, std::span<const double> validation_scores,
                             EnsembleKind kind, TaskKind task) {
  if (member_scores.empty()) throw Error(ErrorCode::EmptyEnsemble, "no member predictions");
  if (member_scores.size() != validation_scores.size()) {
    throw Error(ErrorCode::ShapeMismatch, "one validation score per member is required");
  }
  const auto chosen = selected_members(validation_scores, kind);
  Matrix out(member_scores[chosen.front()].rows(), member_scores[chosen.front()].cols());
  for (std::size_t i : chosen) {
    require_same_shape(out, member_scores[i], "member predictions");
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k] += task == TaskKind::Classification ? logistic(member_scores[i][k]) : member_scores[i][k];
    }
  }
  const auto count = static_cast<Real>(chosen.size());
  for (auto& v : out.flat()) v /= count;
  return out;
}

Matrix ensemble_predict(const Ensemble& ensemble, const Matrix& x) {
  std::vector<Matrix> preds;
  std::vector<double> scores;
  for (const auto& m : ensemble.members) {
    if (m.failed) continue;
    preds.push_back(m.result.model.predict(x));
    scores.push_back(m.validation_score());
  }
  if (preds.empty()) throw Error(ErrorCode::EmptyEnsemble, "ensemble has no trained members");
  return aggregate_predictions(preds, scores, ensemble.kind, ensemble.task);
}

}  // namespace mlr
