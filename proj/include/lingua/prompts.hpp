#pragma once

#include <map>
#include <string>

namespace lingua {

/// Versioned text assets with {placeholder} substitution.
class PromptLibrary {
 public:
  PromptLibrary() = default;
  static PromptLibrary from_directory(const std::string& dir);

  bool has(const std::string& name) const { return templates_.count(name) > 0; }
  const std::string& raw(const std::string& name) const;
  std::string render(const std::string& name,
                     const std::map<std::string, std::string>& values) const;

  void add(std::string name, std::string text) {
    templates_[std::move(name)] = std::move(text);
  }

 private:
  std::map<std::string, std::string> templates_;
};

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& values);

}  // namespace lingua
