#include "eegclip/training/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "eegclip/error.hpp"
#include "eegclip/hash.hpp"

namespace eegclip::train {

using nlohmann::json;

namespace {

/// Per-band identity statistics for folds without any training data.
feat::NormStats identity_stats(std::size_t bands) {
  feat::NormStats s;
  s.de_mean.assign(bands, 0.0);
  s.psd_mean.assign(bands, 0.0);
  s.de_std.assign(bands, 1.0);
  s.psd_std.assign(bands, 1.0);
  return s;
}

template <typename Fn>
std::vector<FoldResult> run_parallel(std::size_t count, std::size_t jobs, Fn&& fn) {
  std::vector<FoldResult> results(count);
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          results[i] = fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

ExperimentResult run_plans(const ExperimentInputs& in, const std::string& protocol,
                           const std::vector<SplitPlan>& plans, const std::vector<model::HeadKind>& heads,
                           const std::vector<std::size_t>& n_shots) {
  ExperimentResult result;
  result.protocol = protocol;
  result.bank_hash_before = in.bank.content_hash();
  const std::size_t per_plan = heads.size();
  result.folds = run_parallel(plans.size() * per_plan, in.jobs, [&](std::size_t i) {
    return run_plan(in, plans[i / per_plan], heads[i % per_plan], n_shots.empty() ? 0 : n_shots[i / per_plan]);
  });
  result.bank_hash_after = in.bank.content_hash();
  return result;
}

}  // namespace

FoldResult run_plan(const ExperimentInputs& in, const SplitPlan& plan, model::HeadKind head, std::size_t n_shot) {
  const auto meta = sample_meta(in.features);
  check_split(plan, meta);
  if (plan.test.empty()) throw Error(ErrorCode::kInsufficientData, "fold " + plan.descriptor() + " has no test samples");

  std::vector<std::size_t> fit = plan.train;
  fit.insert(fit.end(), plan.adapt.begin(), plan.adapt.end());
  std::sort(fit.begin(), fit.end());
  const feat::NormStats stats = fit.empty() ? identity_stats(in.features.config.band_set.size())
                                            : feat::compute_norm_stats(in.features, fit);

  std::vector<std::size_t> needed = fit;
  needed.insert(needed.end(), plan.test.begin(), plan.test.end());
  const auto samples = feat::assemble_samples(in.features, needed, stats);
  std::vector<std::size_t> fit_local(fit.size()), test_local(plan.test.size());
  for (std::size_t i = 0; i < fit.size(); ++i) fit_local[i] = i;
  for (std::size_t i = 0; i < plan.test.size(); ++i) test_local[i] = fit.size() + i;

  RunConfig cfg = in.cfg;
  cfg.seed = seed_mix(in.cfg.seed, {fnv1a64(plan.descriptor())});
  model::EmotionClip model(cfg.model, head, in.features.label_set.size(), cfg.seed);
  const text::TextBank* bank = head == model::HeadKind::kMatching ? &in.bank : nullptr;

  FoldResult r;
  if (!fit_local.empty()) {
    const TrainResult tr = train_model(model, bank, samples, fit_local, cfg);
    r.epochs = tr.history.size();
    r.best_epoch = tr.best_epoch;
    r.best_val_acc = tr.best_val_acc;
  }
  r.accuracy = accuracy(model, bank, samples, test_local, cfg.batch_size);
  r.protocol = plan.protocol;
  r.fold_id = plan.fold_id;
  r.arm = head == model::HeadKind::kMatching ? kArmMatching : kArmLinear;
  r.subject = plan.subject;
  r.train_session = plan.train_session;
  r.test_session = plan.test_session;
  r.n_shot = n_shot;
  r.n_train = plan.train.size();
  r.n_adapt = plan.adapt.size();
  r.n_test = plan.test.size();
  r.head_shape = ad::to_string(model.head().weight.shape());
  r.uses_bank = bank != nullptr;
  return r;
}

ExperimentResult run_loso(const ExperimentInputs& in) {
  const auto plans = loso_folds(sample_meta(in.features));
  return run_plans(in, "loso", plans, {model::HeadKind::kMatching}, {});
}

ExperimentResult run_cross_time(const ExperimentInputs& in) {
  const auto plans = cross_time_folds(sample_meta(in.features));
  return run_plans(in, "cross_time", plans, {model::HeadKind::kMatching}, {});
}

std::vector<SplitPlan> nshot_plans(const ExperimentInputs& in) {
  const auto meta = sample_meta(in.features);
  const std::size_t classes = in.features.label_set.size();
  std::vector<SplitPlan> plans;
  for (const auto& base : loso_folds(meta)) {
    for (auto n : in.cfg.n_shots) {
      const AdaptSplit split = nshot_sample(meta, base.test, n, classes, seed_mix(in.cfg.seed, {fnv1a64(base.fold_id)}));
      SplitPlan p = base;
      p.protocol = "nshot";
      p.fold_id = base.fold_id + "-n" + std::to_string(n);
      if (!in.cfg.source_training) p.train.clear();
      p.adapt = split.adapt;
      p.test = split.test;
      plans.push_back(std::move(p));
    }
  }
  return plans;
}

ExperimentResult run_nshot(const ExperimentInputs& in) {
  const auto plans = nshot_plans(in);
  std::vector<std::size_t> shots;
  for (std::size_t i = 0; i < plans.size(); ++i) shots.push_back(in.cfg.n_shots[i % in.cfg.n_shots.size()]);
  return run_plans(in, "nshot", plans, {model::HeadKind::kMatching}, shots);
}

ExperimentResult run_ablation(const ExperimentInputs& in) {
  const auto plans = loso_folds(sample_meta(in.features));
  auto result = run_plans(in, "ablation", plans, {model::HeadKind::kLinear, model::HeadKind::kMatching}, {});
  return result;
}

json summarize(const ExperimentResult& result) {
  std::map<std::string, std::vector<double>> groups;
  std::vector<double> all;
  for (const auto& f : result.folds) {
    std::string key;
    if (result.protocol == "loso") key = "session" + std::to_string(f.test_session);
    else if (result.protocol == "cross_time") key = "session" + std::to_string(f.train_session) + "to" + std::to_string(f.test_session);
    else if (result.protocol == "nshot") key = "n" + std::to_string(f.n_shot);
    else key = f.arm;
    groups[key].push_back(f.accuracy);
    all.push_back(f.accuracy);
  }
  json j;
  j["protocol"] = result.protocol;
  j["folds"] = result.folds.size();
  auto& g = j["groups"] = json::object();
  for (const auto& [key, accs] : groups) {
    const Metrics m = aggregate(accs);
    g[key] = {{"mean", m.mean}, {"std", m.std}, {"count", accs.size()}};
  }
  if (result.protocol != "nshot" && result.protocol != "ablation") {
    const Metrics m = aggregate(all);
    j["overall"] = {{"mean", m.mean}, {"std", m.std}, {"count", all.size()}};
  }
  if (result.protocol == "ablation" && groups.contains(kArmLinear) && groups.contains(kArmMatching)) {
    j["delta_mean"] = aggregate(groups[kArmMatching]).mean - aggregate(groups[kArmLinear]).mean;
    std::map<std::string, std::map<std::string, double>> by_fold;
    for (const auto& f : result.folds) by_fold[f.fold_id][f.arm] = f.accuracy;
    auto& deltas = j["delta_per_fold"] = json::object();
    for (const auto& [fold, arms] : by_fold) {
      if (arms.contains(kArmLinear) && arms.contains(kArmMatching)) {
        deltas[fold] = arms.at(kArmMatching) - arms.at(kArmLinear);
      }
    }
  }
  j["bank_hash_before"] = result.bank_hash_before;
  j["bank_hash_after"] = result.bank_hash_after;
  j["bank_unchanged"] = result.bank_hash_before == result.bank_hash_after;
  return j;
}

}  // namespace eegclip::train
