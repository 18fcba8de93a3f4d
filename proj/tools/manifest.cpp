#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include "cdmca/error.hpp"

namespace cdmca::cli {

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::Io, "SHA-256 initialisation failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    char b[3];
    std::snprintf(b, sizeof b, "%02x", md[i]);
    hex += b;
  }
  return hex;
}

RunManifest::RunManifest(std::string command)
    : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

void RunManifest::config(const std::string& key, const std::string& value) {
  config_.emplace_back(key, value);
}

void RunManifest::input(const std::filesystem::path& path) { inputs_.push_back(path); }
void RunManifest::output(const std::filesystem::path& path) { outputs_.push_back(path); }

void RunManifest::write(const std::filesystem::path& dir) const {
  const auto path = dir / "manifest.txt";
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  os << "command = " << command_ << '\n';
  for (const auto& [k, v] : config_) os << "config." << k << " = " << v << '\n';
  for (const auto& p : inputs_) os << "input " << p.string() << " = sha256:" << file_digest(p) << '\n';
  for (const auto& p : outputs_) os << "output " << p.string() << " = sha256:" << file_digest(p) << '\n';
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", elapsed.count());
  os << "wall_seconds = " << buf << '\n';
}

}  // namespace cdmca::cli
