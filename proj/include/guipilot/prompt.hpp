#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "guipilot/core.hpp"

namespace guipilot {

enum class Role { Manager, Reflection, Verifier, Search, Coder, Grounder };

inline const char* to_string(Role r) {
  switch (r) {
    case Role::Manager: return "manager";
    case Role::Reflection: return "reflection";
    case Role::Verifier: return "verifier";
    case Role::Search: return "search";
    case Role::Coder: return "coder";
    case Role::Grounder: return "grounder";
  }
  return "manager";
}

inline Role role_from(const std::string& s) {
  return detail::enum_from<Role>(s,
                                 {{"manager", Role::Manager},
                                  {"reflection", Role::Reflection},
                                  {"verifier", Role::Verifier},
                                  {"search", Role::Search},
                                  {"coder", Role::Coder},
                                  {"grounder", Role::Grounder}},
                                 "role");
}

struct RenderError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Template files are plain UTF-8 with {UPPER_CASE} placeholders; an optional
// ===USER=== line splits the system part from the user part. Placeholders must
// start with an uppercase letter, so JSON braces in prompt bodies stay literal.
struct PromptTemplate {
  Role role = Role::Manager;
  std::string system_body;
  std::string user_body;
  std::set<std::string> required_placeholders;
};

namespace detail {

inline void collect_placeholders(const std::string& body, std::set<std::string>& out) {
  for (size_t i = 0; i + 1 < body.size(); ++i) {
    if (body[i] != '{') continue;
    size_t j = i + 1;
    if (!(body[j] >= 'A' && body[j] <= 'Z')) continue;
    std::string name;
    while (j < body.size() &&
           ((body[j] >= 'A' && body[j] <= 'Z') || (body[j] >= '0' && body[j] <= '9') ||
            body[j] == '_')) {
      name.push_back(body[j]);
      ++j;
    }
    if (j < body.size() && body[j] == '}') out.insert(name);
  }
}

inline std::string substitute(const std::string& body,
                              const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(body.size());
  size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{' && i + 1 < body.size() && body[i + 1] >= 'A' && body[i + 1] <= 'Z') {
      size_t j = i + 1;
      std::string name;
      while (j < body.size() &&
             ((body[j] >= 'A' && body[j] <= 'Z') || (body[j] >= '0' && body[j] <= '9') ||
              body[j] == '_')) {
        name.push_back(body[j]);
        ++j;
      }
      if (j < body.size() && body[j] == '}') {
        auto it = bindings.find(name);
        if (it == bindings.end()) throw RenderError("unbound placeholder {" + name + "}");
        out += it->second;
        i = j + 1;
        continue;
      }
    }
    out.push_back(body[i]);
    ++i;
  }
  return out;
}

}  // namespace detail

inline PromptTemplate load_template(const std::string& path, Role role) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LoadError("cannot open template: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();

  PromptTemplate tpl;
  tpl.role = role;
  const std::string sep = "===USER===";
  size_t at = text.find(sep);
  if (at == std::string::npos) {
    tpl.user_body = text;
  } else {
    tpl.system_body = text.substr(0, at);
    size_t after = at + sep.size();
    if (after < text.size() && text[after] == '\n') ++after;
    tpl.user_body = text.substr(after);
    // drop the trailing newline that preceded the separator line
    if (!tpl.system_body.empty() && tpl.system_body.back() == '\n') tpl.system_body.pop_back();
  }
  detail::collect_placeholders(tpl.system_body, tpl.required_placeholders);
  detail::collect_placeholders(tpl.user_body, tpl.required_placeholders);
  return tpl;
}

struct RenderedPrompt {
  std::string system_text;
  std::string user_text;
};

// Pure substitution: identical bindings give byte-identical output.
inline RenderedPrompt render_prompt(const PromptTemplate& tpl,
                                    const std::map<std::string, std::string>& bindings) {
  for (const auto& name : tpl.required_placeholders) {
    if (!bindings.count(name)) throw RenderError("unbound placeholder {" + name + "}");
  }
  return {detail::substitute(tpl.system_body, bindings),
          detail::substitute(tpl.user_body, bindings)};
}

}  // namespace guipilot
