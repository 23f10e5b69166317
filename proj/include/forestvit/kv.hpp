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

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace forestvit {

// Flat key=value text: one pair per line, '#' starts a comment line, blank
// lines ignored, surrounding whitespace trimmed. Keys are emitted sorted.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_kv(std::string_view text);
std::string format_kv(const KeyValues& kv);
KeyValues read_kv_file(const std::filesystem::path& path);
void write_kv_file(const std::filesystem::path& path, const KeyValues& kv);

// Shortest round-trip-safe text (17 significant digits).
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view key);
std::size_t parse_size(std::string_view text, std::string_view key);
bool parse_bool(std::string_view text, std::string_view key);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace forestvit
