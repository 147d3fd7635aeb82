#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

#include "wavesrc/error.hpp"
#include "wavesrc/io.hpp"

namespace wavesrc {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw NumericalError("sha256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);

  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

void RunManifest::record_output(const fs::path& dir, const std::string& file) {
  outputs.push_back({file, sha256_file(dir / file)});
}

json to_json(const RunManifest& m) {
  json outputs = json::array();
  for (const auto& o : m.outputs) outputs.push_back({{"path", o.path}, {"sha256", o.sha256}});
  return {{"tool", "wavesrc"},
          {"command", m.command},
          {"version", m.tool_version},
          {"config", m.config},
          {"generator", {{"id", m.generator}, {"seed", m.seed}}},
          {"isa", m.isa},
          {"threads", m.threads},
          {"timings", m.timings},
          {"warnings", m.warnings},
          {"outputs", outputs}};
}

RunManifest manifest_from_json(const json& j) {
  try {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.tool_version = j.at("version").get<std::string>();
    m.config = j.at("config");
    m.generator = j.at("generator").at("id").get<std::string>();
    m.seed = j.at("generator").at("seed").get<std::uint64_t>();
    m.isa = j.at("isa").get<std::string>();
    m.threads = j.at("threads").get<int>();
    m.timings = j.at("timings").get<std::map<std::string, double>>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& o : j.at("outputs"))
      m.outputs.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>()});
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what(), "manifest");
  }
}

void write_manifest(const RunManifest& m, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << to_json(m).dump(2) << '\n';
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'", "manifest");
  try {
    return manifest_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("parse error: ") + e.what(), "manifest");
  }
}

bool verify_outputs(const RunManifest& m, const fs::path& dir) {
  for (const auto& o : m.outputs) {
    if (!fs::exists(dir / o.path)) return false;
    if (sha256_file(dir / o.path) != o.sha256) return false;
  }
  return true;
}

}  // namespace wavesrc
