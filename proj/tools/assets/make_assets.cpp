// Copyright 2026 The bevscape Authors
// SPDX-License-Identifier: Apache-2.0
//
// Regenerates the shipped asset tables from the built-in defaults.
// Usage: bevscape_make_assets <dir>
#include <cstdio>
#include <filesystem>

#include "core/formats.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <asset-dir>\n", argv[0]);
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  try {
    bevscape::write_file(dir / "biome_lut.sdlt", bevscape::write_lut(bevscape::default_biome_lut()));
    bevscape::write_file(dir / "label_rules.sdlr", bevscape::write_rules(bevscape::default_label_rules()));
    bevscape::write_file(dir / "palette.sdpl", bevscape::write_palette(bevscape::default_palette()));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
