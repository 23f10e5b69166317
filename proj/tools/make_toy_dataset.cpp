/*
 * Copyright 2026 The ForestViT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Writes the synthetic four-class toy dataset used by the tests and the
// convergence check.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "forestvit/errors.hpp"
#include "forestvit/toy_data.hpp"

int main(int argc, char** argv) {
  forestvit::ToyDatasetOptions o;
  std::string root;
  CLI::App app{"Generate the synthetic toy dataset"};
  app.add_option("--output", root, "dataset root to create")->required();
  app.add_option("--seed", o.seed, "generator seed");
  app.add_option("--image-size", o.image_size, "image side in pixels (at least 32)");
  app.add_option("--train-per-class", o.train_per_class, "training images per class");
  app.add_option("--validation-per-class", o.validation_per_class, "validation images per class");
  app.add_option("--test-per-class", o.test_per_class, "test images per class");
  app.add_option("--noise", o.noise, "half-width of the uniform pixel noise");
  app.add_flag("--translated", o.translated, "shared colour, shapes at random toroidal offsets");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  try {
    const std::size_t n = forestvit::write_toy_dataset(root, o);
    std::printf("wrote %zu images to %s\n", n, root.c_str());
  } catch (const forestvit::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
