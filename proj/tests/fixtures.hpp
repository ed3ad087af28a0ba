#pragma once

#include <filesystem>
#include <string>

#include "dynmatch/io.hpp"

inline dynmatch::Fixture fixture(const std::string& name) {
  return dynmatch::load_fixture(std::filesystem::path(DYNMATCH_DATA_DIR) / "fixtures" / (name + ".json"));
}

inline dynmatch::ChildId child_named(const dynmatch::Environment& env, const std::string& name) {
  for (const auto& c : env.children)
    if (env.name(c.id) == name) return c.id;
  throw std::invalid_argument("no child " + name);
}

inline dynmatch::HomeId home_named(const dynmatch::Environment& env, const std::string& name) {
  for (const auto& h : env.homes)
    if (env.name(h.id) == name) return h.id;
  throw std::invalid_argument("no home " + name);
}
