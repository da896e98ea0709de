#include "vox2fea/pipeline/manifest.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <fmt/core.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "vox2fea/core/types.hpp"

namespace vox2fea::pipeline {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw ComputationError("sha256: digest setup failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md.data(), &len);
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot read {}", path.string()));
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

const StageRecord* Manifest::find(const std::string& stage) const {
  for (const auto& s : stages)
    if (s.stage == stage) return &s;
  return nullptr;
}

std::string Manifest::to_json() const {
  nlohmann::ordered_json j;
  j["config_sha256"] = config_sha256;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : stages) {
    nlohmann::ordered_json js;
    js["stage"] = s.stage;
    js["key"] = s.key;
    js["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& a : s.artifacts) js["artifacts"].push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
    j["stages"].push_back(js);
  }
  return j.dump(2) + "\n";
}

Manifest Manifest::from_json(const std::string& text) {
  Manifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.config_sha256 = j.at("config_sha256").get<std::string>();
    for (const auto& js : j.at("stages")) {
      StageRecord s{js.at("stage").get<std::string>(), js.at("key").get<std::string>(), {}};
      for (const auto& a : js.at("artifacts"))
        s.artifacts.push_back({a.at("path").get<std::string>(), a.at("sha256").get<std::string>(),
                               a.at("bytes").get<std::uintmax_t>()});
      m.stages.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("manifest: {}", e.what()));
  }
  return m;
}

std::optional<Manifest> Manifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_json(ss.str());
  } catch (const FormatError&) {
    return std::nullopt;
  }
}

void Manifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  out << to_json();
  if (!out) throw FormatError(fmt::format("cannot write {}", path.string()));
}

ArtifactRecord make_record(const std::filesystem::path& root, const std::filesystem::path& file) {
  return {std::filesystem::relative(file, root).generic_string(), sha256_file(file), std::filesystem::file_size(file)};
}

bool artifacts_intact(const std::filesystem::path& root, const StageRecord& stage) {
  for (const auto& a : stage.artifacts) {
    const auto p = root / a.path;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec) || std::filesystem::file_size(p, ec) != a.bytes) return false;
    if (sha256_file(p) != a.sha256) return false;
  }
  return true;
}

}  // namespace vox2fea::pipeline
