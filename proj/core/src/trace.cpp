#include "matchforge/trace.hpp"

#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "matchforge/error.hpp"

namespace matchforge::trace {

namespace {

using json = nlohmann::json;

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    raise(Errc::StorageFailure, "sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

const char* artifact_kind_name(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::Corpus: return "corpus";
    case ArtifactKind::Ontology: return "ontology";
    case ArtifactKind::ChunkPlan: return "chunk_plan";
    case ArtifactKind::Checkpoint: return "checkpoint";
    case ArtifactKind::Ranking: return "ranking";
    case ArtifactKind::Report: return "report";
    case ArtifactKind::Config: return "config";
  }
  return "report";
}

ArtifactKind artifact_kind_from_name(std::string_view name) {
  if (name == "corpus") return ArtifactKind::Corpus;
  if (name == "ontology") return ArtifactKind::Ontology;
  if (name == "chunk_plan") return ArtifactKind::ChunkPlan;
  if (name == "checkpoint") return ArtifactKind::Checkpoint;
  if (name == "ranking") return ArtifactKind::Ranking;
  if (name == "report") return ArtifactKind::Report;
  if (name == "config") return ArtifactKind::Config;
  raise(Errc::ParseError, "unknown artifact kind '" + std::string(name) + "'");
}

Store Store::open(const std::filesystem::path& root) {
  Store store;
  store.root_ = root;
  std::error_code ec;
  std::filesystem::create_directories(root / "objects", ec);
  if (ec) raise(Errc::StorageFailure, "cannot create store at " + root.string());
  const std::filesystem::path ledger = root / "ledger.ndjson";
  if (!std::filesystem::exists(ledger)) {
    std::ofstream touch(ledger, std::ios::app);
    if (!touch) raise(Errc::StorageFailure, "cannot create " + ledger.string());
  }
  store.load_ledger();
  return store;
}

std::filesystem::path Store::blob_path(const std::string& hash) const {
  return root_ / "objects" / hash.substr(0, 2) / hash.substr(2);
}

void Store::append_ledger(const std::string& line) {
  const std::filesystem::path ledger = root_ / "ledger.ndjson";
  std::FILE* f = std::fopen(ledger.c_str(), "ab");
  if (!f) raise(Errc::StorageFailure, "cannot open ledger for append");
  const int fd = fileno(f);
  if (flock(fd, LOCK_EX) != 0) {
    std::fclose(f);
    raise(Errc::StorageFailure, "cannot lock ledger");
  }
  const std::string record = line + "\n";
  const bool ok = std::fwrite(record.data(), 1, record.size(), f) == record.size() &&
                  std::fflush(f) == 0;
  flock(fd, LOCK_UN);
  std::fclose(f);
  if (!ok) raise(Errc::StorageFailure, "short write to ledger");
}

void Store::load_ledger() {
  std::ifstream in(root_ / "ledger.ndjson");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) raise(Errc::StorageFailure, "corrupt ledger line");
    const std::string type = j.value("type", "");
    if (type == "artifact") {
      ArtifactRef ref;
      ref.content_hash = j.at("hash").get<std::string>();
      ref.kind = artifact_kind_from_name(j.at("kind").get<std::string>());
      ref.byte_size = j.at("byte_size").get<std::uint64_t>();
      ref.created_at = j.value("created_at", "");
      artifacts_[ref.content_hash] = ref;
    } else if (type == "run") {
      RunRecord run;
      run.run_id = j.at("run_id").get<std::string>();
      run.stage = j.at("stage").get<std::string>();
      run.config_hash = j.at("config").get<std::string>();
      run.inputs = j.at("inputs").get<std::vector<std::string>>();
      run.outputs = j.at("outputs").get<std::vector<std::string>>();
      if (j.contains("metrics"))
        run.metrics = j.at("metrics").get<std::map<std::string, double>>();
      run.seed = j.value("seed", std::uint64_t{0});
      run.created_at = j.value("created_at", "");
      for (const std::string& out : run.outputs) producers_[out].push_back(run.run_id);
      runs_[run.run_id] = std::move(run);
    } else {
      raise(Errc::StorageFailure, "unknown ledger record type '" + type + "'");
    }
  }
}

ArtifactRef Store::put_artifact(std::string_view bytes, ArtifactKind kind) {
  const std::string hash = sha256_hex(bytes);
  auto it = artifacts_.find(hash);
  if (it != artifacts_.end()) return it->second;

  const std::filesystem::path path = blob_path(hash);
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) raise(Errc::StorageFailure, "cannot create blob directory");
  if (!std::filesystem::exists(path)) {
    // Write-then-rename so readers never see partial blobs.
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!out) raise(Errc::StorageFailure, "cannot write blob " + hash);
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) raise(Errc::StorageFailure, "cannot finalize blob " + hash);
  }

  ArtifactRef ref;
  ref.content_hash = hash;
  ref.kind = kind;
  ref.byte_size = bytes.size();
  ref.created_at = now_iso8601();

  json j;
  j["type"] = "artifact";
  j["hash"] = ref.content_hash;
  j["kind"] = artifact_kind_name(ref.kind);
  j["byte_size"] = ref.byte_size;
  j["created_at"] = ref.created_at;
  append_ledger(j.dump());

  artifacts_[hash] = ref;
  return ref;
}

bool Store::has_artifact(const std::string& hash) const {
  return artifacts_.count(hash) != 0;
}

const ArtifactRef& Store::artifact(const std::string& hash) const {
  auto it = artifacts_.find(hash);
  if (it == artifacts_.end()) raise(Errc::UnknownId, "unknown artifact " + hash);
  return it->second;
}

std::string Store::read_blob(const std::string& hash) const {
  if (!artifacts_.count(hash)) raise(Errc::UnknownId, "unknown artifact " + hash);
  std::ifstream in(blob_path(hash), std::ios::binary);
  if (!in) raise(Errc::MissingInput, "blob missing for " + hash);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string Store::run_digest(const std::string& stage, const std::string& config_hash,
                              std::vector<std::string> input_hashes) {
  std::sort(input_hashes.begin(), input_hashes.end());
  std::string material = stage;
  material += '\n';
  material += config_hash;
  for (const std::string& h : input_hashes) {
    material += '\n';
    material += h;
  }
  return sha256_hex(material);
}

RunRecord Store::record_run(const std::string& stage, const std::string& config_hash,
                            const std::vector<std::string>& inputs,
                            const std::vector<ArtifactRef>& outputs,
                            const std::map<std::string, double>& metrics,
                            std::uint64_t seed) {
  if (!artifacts_.count(config_hash))
    raise(Errc::UnknownRef, "config " + config_hash + " not in store");
  for (const std::string& h : inputs)
    if (!artifacts_.count(h)) raise(Errc::UnknownRef, "input " + h + " not in store");
  for (const ArtifactRef& ref : outputs)
    if (!artifacts_.count(ref.content_hash))
      raise(Errc::UnknownRef, "output " + ref.content_hash + " not in store");

  RunRecord run;
  run.run_id = run_digest(stage, config_hash, inputs);
  run.stage = stage;
  run.config_hash = config_hash;
  run.inputs = inputs;
  for (const ArtifactRef& ref : outputs) run.outputs.push_back(ref.content_hash);
  run.metrics = metrics;
  run.seed = seed;
  run.created_at = now_iso8601();

  json j;
  j["type"] = "run";
  j["run_id"] = run.run_id;
  j["stage"] = run.stage;
  j["config"] = run.config_hash;
  j["inputs"] = run.inputs;
  j["outputs"] = run.outputs;
  j["metrics"] = run.metrics;
  j["seed"] = run.seed;
  j["created_at"] = run.created_at;
  append_ledger(j.dump());

  for (const std::string& out : run.outputs) producers_[out].push_back(run.run_id);
  runs_[run.run_id] = run;
  return run;
}

bool Store::has_run(const std::string& run_id) const { return runs_.count(run_id) != 0; }

const RunRecord& Store::run(const std::string& run_id) const {
  auto it = runs_.find(run_id);
  if (it == runs_.end()) raise(Errc::UnknownId, "unknown run " + run_id);
  return it->second;
}

std::vector<RunRecord> Store::runs() const {
  std::vector<RunRecord> out;
  out.reserve(runs_.size());
  for (const auto& [id, run] : runs_) out.push_back(run);
  return out;
}

Lineage Store::lineage(const std::string& id) const {
  const bool is_artifact = artifacts_.count(id) != 0;
  const bool is_run = runs_.count(id) != 0;
  if (!is_artifact && !is_run) raise(Errc::UnknownId, "unknown id " + id);

  Lineage lin;
  std::set<std::string> visited;

  // Post-order DFS so ancestors land before their consumers.
  auto visit = [&](auto&& self, const std::string& node, bool artifact) -> void {
    if (visited.count(node)) return;
    visited.insert(node);
    if (artifact) {
      auto prod = producers_.find(node);
      if (prod != producers_.end()) {
        for (const std::string& run_id : prod->second) {
          self(self, run_id, false);
          lin.edges.emplace_back(run_id, node);
        }
      }
      lin.nodes.push_back({LineageNode::Type::Artifact, node});
    } else {
      const RunRecord& r = runs_.at(node);
      for (const std::string& input : r.inputs) {
        self(self, input, true);
        lin.edges.emplace_back(input, node);
      }
      lin.nodes.push_back({LineageNode::Type::Run, node});
    }
  };
  visit(visit, id, is_artifact);
  return lin;
}

ReplayResult Store::verify_replay(const std::string& run_id,
                                  const StageRegistry& registry) const {
  const RunRecord& record = run(run_id);

  auto stage_it = registry.find(record.stage);
  if (stage_it == registry.end())
    raise(Errc::UnknownId, "no executor registered for stage '" + record.stage + "'");

  // Inputs must still be present and intact; a tampered input is as good as
  // missing for replay purposes.
  const std::string config_bytes = read_blob(record.config_hash);
  if (sha256_hex(config_bytes) != record.config_hash)
    raise(Errc::MissingInput, "config blob tampered: " + record.config_hash);
  std::vector<std::string> inputs;
  inputs.reserve(record.inputs.size());
  for (const std::string& h : record.inputs) {
    std::string bytes = read_blob(h);
    if (sha256_hex(bytes) != h)
      raise(Errc::MissingInput, "input blob tampered: " + h);
    inputs.push_back(std::move(bytes));
  }

  const StageOutput replayed = stage_it->second(config_bytes, inputs);

  ReplayResult result;
  auto mark = [&](const std::string& hash) {
    if (std::find(result.diverged_hashes.begin(), result.diverged_hashes.end(), hash) ==
        result.diverged_hashes.end())
      result.diverged_hashes.push_back(hash);
  };

  if (replayed.blobs.size() != record.outputs.size()) {
    for (const std::string& h : record.outputs) mark(h);
  } else {
    for (std::size_t i = 0; i < record.outputs.size(); ++i) {
      if (sha256_hex(replayed.blobs[i].first) != record.outputs[i])
        mark(record.outputs[i]);
    }
  }
  // Stored bytes must still match what the record promised.
  for (const std::string& h : record.outputs) {
    std::ifstream in(blob_path(h), std::ios::binary);
    if (!in) {
      mark(h);
      continue;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    if (sha256_hex(buffer.str()) != h) mark(h);
  }

  result.status = result.diverged_hashes.empty() ? ReplayResult::Status::Reproduced
                                                 : ReplayResult::Status::Diverged;
  return result;
}

}  // namespace matchforge::trace
