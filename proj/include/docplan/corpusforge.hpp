#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "docplan/command_plan.hpp"
#include "docplan/registry.hpp"

namespace docplan::forge {

/// Removes HTML tags and comments, drops <script>/<style> bodies, decodes
/// character references, and normalizes whitespace: runs of blanks become one
/// space, line breaks (including those implied by block elements) become a
/// single '\n'. All other text, link anchors included, is kept.
///
/// Throws Error{InvalidEncoding} if `raw` is not valid UTF-8.
std::string strip_markup(std::string_view raw);

/// Ordered token substitution table. Entries are applied longest source
/// first, so phrase entries ("scheduler jobs create") win over any shorter
/// entry that starts at the same position.
class RenameMap {
 public:
  using Entry = std::pair<std::string, std::string>;

  RenameMap() = default;
  /// Throws Error{InvalidRenameMap} on empty tokens or on a source token
  /// mapped to two different targets. Exact duplicates are collapsed.
  explicit RenameMap(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  /// Entries ordered longest source first; ties keep declaration order.
  const std::vector<Entry>& application_order() const noexcept { return ordered_; }
  bool empty() const noexcept { return entries_.empty(); }

  /// sha256 over the canonical JSON form.
  std::string digest() const;
  nlohmann::json to_json() const;

 private:
  std::vector<Entry> entries_;
  std::vector<Entry> ordered_;
};

/// Rename map file: JSON array of [source, target] pairs.
RenameMap read_rename_map(const std::filesystem::path& path);
RenameMap rename_map_from_json(const nlohmann::json& j);

/// Single left-to-right pass; replaced text is never re-matched.
std::string apply_rename(std::string_view text, const RenameMap& map);

struct LeakageViolation {
  std::string token;
  std::size_t offset = 0;
  bool operator==(const LeakageViolation&) const = default;
};

/// Every (token, byte offset) where a forbidden token occurs at word
/// boundaries, ordered by offset.
std::vector<LeakageViolation> check_leakage(std::string_view text,
                                            const std::set<std::string>& forbidden);

struct BenchmarkTask {
  std::string task_id;
  std::string question;
  CommandPlan gold_plan;
};

struct BenchmarkMetadata {
  std::string source_corpus;
  std::string rename_map_digest;
  std::uint64_t creation_seed = 0;
};

struct Benchmark {
  std::vector<BenchmarkTask> tasks;
  std::vector<DemoExample> demo_pool;
  BenchmarkMetadata metadata;

  const BenchmarkTask* find_task(std::string_view task_id) const;
};

nlohmann::json to_json(const Benchmark& b);
Benchmark benchmark_from_json(const nlohmann::json& j);
Benchmark read_benchmark(const std::filesystem::path& path);
void write_benchmark(const Benchmark& b, const std::filesystem::path& path);

/// Tasks in source vocabulary, before renaming. Gold plan entries may carry
/// backslash continuations.
struct SourceTask {
  std::string task_id;
  std::string question;
  std::vector<std::string> gold_plan;
};

struct SourceTasks {
  std::vector<SourceTask> tasks;
  std::vector<DemoExample> demo_pool;
};

SourceTasks source_tasks_from_json(const nlohmann::json& j);
SourceTasks read_source_tasks(const std::filesystem::path& path);

/// Reads a raw documentation directory: one file per tool, file stem = source
/// tool_id. Files are visited in lexicographic order. The first line after a
/// "SYNOPSIS" heading, when present, becomes the signature.
ToolRegistry ingest_raw_corpus(const std::filesystem::path& dir);

struct ForgeOptions {
  std::set<std::string> forbidden{"gcloud", "gsutil"};
  /// Leading tokens accepted in gold plans without a registered tool.
  std::set<std::string> passthrough{"ffmpeg"};
  std::string source_corpus;
  std::uint64_t creation_seed = 0;
  std::size_t min_commands = 2;
};

struct ForgeResult {
  Benchmark benchmark;
  ToolRegistry registry;
};

/// Renames every tool doc, question, gold plan and demo, then certifies the
/// result. Throws Error{InvalidGoldPlan}, Error{DuplicateTaskId} or
/// Error{LeakageDetected} (details carry the violations).
ForgeResult build_benchmark(const SourceTasks& source, const RenameMap& map,
                            const ToolRegistry& source_registry, const ForgeOptions& options = {});

/// Leakage over every text a benchmark exposes: tool ids, names, signatures,
/// docs, tool demos, questions, gold plans and the task-level demo pool.
/// Each violation is tagged with where it was found.
nlohmann::json scan_benchmark_leakage(const Benchmark& benchmark, const ToolRegistry& registry,
                                      const std::set<std::string>& forbidden);

}  // namespace docplan::forge
