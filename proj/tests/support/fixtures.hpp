#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "tkbc/kb.hpp"

namespace tkbc::testing {

// Builds a TemporalKB from named facts with instants given directly as ids.
class KbBuilder {
 public:
  KbBuilder& add(Fold fold, const std::string& s, const std::string& r, const std::string& o, Instant b, Instant e) {
    Fact f;
    f.subject = vocab_.intern_entity(s);
    f.relation = vocab_.intern_relation(r);
    f.object = vocab_.intern_entity(o);
    f.interval = {b, e};
    folds_[static_cast<std::size_t>(fold)].push_back(f);
    return *this;
  }

  KbBuilder& train(const std::string& s, const std::string& r, const std::string& o, Instant b, Instant e) {
    return add(Fold::train, s, r, o, b, e);
  }

  KbBuilder& entity(const std::string& name) {
    vocab_.intern_entity(name);
    return *this;
  }

  TemporalKB build(InstantDomain domain, bool inverses = true) const {
    TemporalKB kb(vocab_, folds_, domain);
    return inverses ? add_inverse_facts(kb) : kb;
  }

 private:
  Vocabulary vocab_;
  std::array<std::vector<Fact>, 3> folds_;
};

// Directory under the system temp path, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("tkbc_test_" + std::to_string(stamp) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace tkbc::testing
