#pragma once

#include "datagen/core.hpp"
#include "datagen/templates.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testing_util {

inline std::filesystem::path fixture(const std::string &rel) { return std::filesystem::path(DATAGEN_FIXTURE_DIR) / rel; }

inline const datagen::TemplateLibrary &templates() {
    static const auto lib = datagen::TemplateLibrary::load(DATAGEN_TEMPLATE_DIR);
    return lib;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string &tag = "datagen-test") {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / (tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    const std::filesystem::path &path() const { return path_; }
    std::filesystem::path operator/(const std::string &rel) const { return path_ / rel; }

  private:
    std::filesystem::path path_;
};

inline datagen::DatasetItem mc_item(std::string id, std::string text, std::string label = "A") {
    datagen::DatasetItem it;
    it.id = std::move(id);
    it.text = std::move(text);
    it.choices = std::vector<datagen::Choice>{{"A", "first option"}, {"B", "second option"}, {"C", "third option"}};
    it.label = std::move(label);
    return it;
}

inline datagen::DatasetItem numeric_item(std::string id, std::string text, std::string label) {
    datagen::DatasetItem it;
    it.id = std::move(id);
    it.text = std::move(text);
    it.label = std::move(label);
    return it;
}

} // namespace testing_util
