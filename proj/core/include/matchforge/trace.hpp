#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace matchforge::trace {

std::string sha256_hex(std::string_view bytes);

enum class ArtifactKind { Corpus, Ontology, ChunkPlan, Checkpoint, Ranking, Report, Config };

const char* artifact_kind_name(ArtifactKind k);
ArtifactKind artifact_kind_from_name(std::string_view name);

struct ArtifactRef {
  std::string content_hash;  // sha256 of the stored bytes, hex
  ArtifactKind kind = ArtifactKind::Report;
  std::uint64_t byte_size = 0;
  std::string created_at;  // ledger metadata only, excluded from hashing
};

struct RunRecord {
  std::string run_id;  // sha256 over (stage, config hash, sorted input hashes)
  std::string stage;
  std::string config_hash;
  std::vector<std::string> inputs;   // artifact hashes
  std::vector<std::string> outputs;  // artifact hashes, recorded post-success
  std::map<std::string, double> metrics;
  std::uint64_t seed = 0;
  std::string created_at;
};

struct StageOutput {
  std::vector<std::pair<std::string, ArtifactKind>> blobs;  // bytes + kind
  std::map<std::string, double> metrics;
};

// Re-executable stage: pure function of (config bytes, input blobs).
using StageFn = std::function<StageOutput(const std::string& config_json,
                                          const std::vector<std::string>& inputs)>;
using StageRegistry = std::map<std::string, StageFn>;

struct LineageNode {
  enum class Type { Artifact, Run };
  Type type = Type::Artifact;
  std::string id;  // content hash or run id
};

struct Lineage {
  std::vector<LineageNode> nodes;  // topologically ordered, ancestors first
  std::vector<std::pair<std::string, std::string>> edges;  // producer -> consumer
};

struct ReplayResult {
  enum class Status { Reproduced, Diverged };
  Status status = Status::Reproduced;
  std::vector<std::string> diverged_hashes;
};

// Append-only ledger (one JSON record per line) plus a content-addressed
// blob directory laid out objects/ab/cdef... by hash prefix. Appends take an
// advisory flock on the ledger file; readers are lock-free.
class Store {
 public:
  static Store open(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }

  // Idempotent for identical bytes.
  ArtifactRef put_artifact(std::string_view bytes, ArtifactKind kind);
  bool has_artifact(const std::string& hash) const;
  const ArtifactRef& artifact(const std::string& hash) const;  // UnknownId
  std::string read_blob(const std::string& hash) const;  // MissingInput if gone

  static std::string run_digest(const std::string& stage, const std::string& config_hash,
                                std::vector<std::string> input_hashes);

  RunRecord record_run(const std::string& stage, const std::string& config_hash,
                       const std::vector<std::string>& inputs,
                       const std::vector<ArtifactRef>& outputs,
                       const std::map<std::string, double>& metrics,
                       std::uint64_t seed);

  bool has_run(const std::string& run_id) const;
  const RunRecord& run(const std::string& run_id) const;  // UnknownId
  std::vector<RunRecord> runs() const;

  // Ancestry closure of an artifact hash or run id: producing runs and
  // their inputs, transitively.
  Lineage lineage(const std::string& id) const;

  // Re-executes the recorded stage and compares output hashes bit-for-bit
  // against both the record and the bytes currently stored.
  ReplayResult verify_replay(const std::string& run_id, const StageRegistry& registry) const;

 private:
  std::filesystem::path blob_path(const std::string& hash) const;
  void append_ledger(const std::string& line);
  void load_ledger();

  std::filesystem::path root_;
  std::map<std::string, ArtifactRef> artifacts_;
  std::map<std::string, RunRecord> runs_;
  std::map<std::string, std::vector<std::string>> producers_;  // artifact -> run ids
};

}  // namespace matchforge::trace
