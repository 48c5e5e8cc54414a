#include "eegclip/training/protocols.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "eegclip/error.hpp"
#include "eegclip/hash.hpp"

namespace eegclip::train {

std::vector<SampleMeta> sample_meta(const feat::FeatureSet& features) {
  std::vector<SampleMeta> meta;
  meta.reserve(features.items.size());
  for (const auto& item : features.items) meta.push_back({item.subject_id, item.session_id, item.label_index});
  return meta;
}

std::vector<SplitPlan> loso_folds(std::span<const SampleMeta> samples) {
  std::set<std::uint32_t> subjects;
  std::map<std::uint32_t, std::map<std::uint32_t, std::vector<std::size_t>>> by_session;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    subjects.insert(samples[i].subject);
    by_session[samples[i].session][samples[i].subject].push_back(i);
  }
  std::vector<SplitPlan> plans;
  for (const auto& [session, by_subject] : by_session) {
    for (auto subject : subjects) {
      if (!by_subject.contains(subject)) {
        throw Error(ErrorCode::kInsufficientData, "loso: subject " + std::to_string(subject) +
                                                      " has no samples in session " + std::to_string(session));
      }
    }
    for (const auto& [subject, held_out] : by_subject) {
      SplitPlan p;
      p.protocol = "loso";
      p.fold_id = "session" + std::to_string(session) + "-subject" + std::to_string(subject);
      p.subject = subject;
      p.train_session = p.test_session = session;
      p.test = held_out;
      for (const auto& [other, idx] : by_subject) {
        if (other != subject) p.train.insert(p.train.end(), idx.begin(), idx.end());
      }
      std::sort(p.train.begin(), p.train.end());
      plans.push_back(std::move(p));
    }
  }
  return plans;
}

std::vector<SplitPlan> cross_time_folds(std::span<const SampleMeta> samples) {
  std::map<std::uint32_t, std::map<std::uint32_t, std::vector<std::size_t>>> by_subject;
  for (std::size_t i = 0; i < samples.size(); ++i) by_subject[samples[i].subject][samples[i].session].push_back(i);
  std::vector<SplitPlan> plans;
  for (const auto& [subject, sessions] : by_subject) {
    if (sessions.size() < 3) {
      throw Error(ErrorCode::kInsufficientData, "cross_time: subject " + std::to_string(subject) + " has " +
                                                    std::to_string(sessions.size()) + " sessions, 3 required");
    }
    auto it = sessions.begin();
    const std::uint32_t a = (it++)->first, b = (it++)->first, c = it->first;
    for (auto [tr, te] : {std::pair{a, b}, std::pair{a, c}, std::pair{b, c}}) {
      SplitPlan p;
      p.protocol = "cross_time";
      p.fold_id = "subject" + std::to_string(subject) + "-session" + std::to_string(tr) + "to" + std::to_string(te);
      p.subject = subject;
      p.train_session = tr;
      p.test_session = te;
      p.train = sessions.at(tr);
      p.test = sessions.at(te);
      plans.push_back(std::move(p));
    }
  }
  return plans;
}

AdaptSplit nshot_sample(std::span<const SampleMeta> samples, std::span<const std::size_t> pool, std::size_t n,
                        std::size_t num_classes, std::uint64_t seed) {
  AdaptSplit out;
  if (n == 0) {
    out.test.assign(pool.begin(), pool.end());
    return out;
  }
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (auto i : pool) {
    if (samples[i].label >= num_classes) throw Error(ErrorCode::kInvalidArgument, "nshot: label index out of range");
    by_class[samples[i].label].push_back(i);
  }
  std::set<std::size_t> chosen;
  for (std::size_t k = 0; k < num_classes; ++k) {
    auto& members = by_class[k];
    if (members.size() < n) {
      throw Error(ErrorCode::kInsufficientData, "nshot: class " + std::to_string(k) + " has " +
                                                    std::to_string(members.size()) + " samples, " + std::to_string(n) +
                                                    " requested");
    }
    std::mt19937_64 rng(seed_mix(seed, {k, n}));
    std::shuffle(members.begin(), members.end(), rng);
    chosen.insert(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n));
  }
  out.adapt.assign(chosen.begin(), chosen.end());
  for (auto i : pool) {
    if (!chosen.contains(i)) out.test.push_back(i);
  }
  return out;
}

void check_split(const SplitPlan& plan, std::span<const SampleMeta> samples) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInvalidArgument, "split " + plan.descriptor() + ": " + why);
  };
  const std::set<std::size_t> train(plan.train.begin(), plan.train.end());
  const std::set<std::size_t> adapt(plan.adapt.begin(), plan.adapt.end());
  const std::set<std::size_t> test(plan.test.begin(), plan.test.end());
  if (train.size() != plan.train.size() || adapt.size() != plan.adapt.size() || test.size() != plan.test.size()) {
    fail("duplicate index");
  }
  for (auto i : test) {
    if (i >= samples.size()) fail("index out of range");
    if (train.contains(i)) fail("sample " + std::to_string(i) + " in train and test");
    if (adapt.contains(i)) fail("sample " + std::to_string(i) + " in adapt and test");
  }
  for (auto i : adapt) {
    if (i >= samples.size()) fail("index out of range");
    if (train.contains(i)) fail("sample " + std::to_string(i) + " in train and adapt");
  }
  for (auto i : train) {
    if (i >= samples.size()) fail("index out of range");
  }
  if (plan.protocol == "loso" || plan.protocol == "nshot") {
    std::set<std::uint32_t> test_subjects;
    for (auto i : test) test_subjects.insert(samples[i].subject);
    for (auto i : train) {
      if (test_subjects.contains(samples[i].subject)) {
        fail("subject " + std::to_string(samples[i].subject) + " on both sides");
      }
    }
  } else if (plan.protocol == "cross_time") {
    std::set<std::uint32_t> train_sessions;
    for (auto i : train) train_sessions.insert(samples[i].session);
    for (auto i : test) {
      if (train_sessions.contains(samples[i].session)) {
        fail("session " + std::to_string(samples[i].session) + " on both sides");
      }
    }
  }
}

}  // namespace eegclip::train
