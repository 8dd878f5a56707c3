#include "xmodseg/core/hash.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>

#include "xmodseg/core/error.hpp"

namespace xmodseg {

namespace {

std::string to_hex(const unsigned char* digest, unsigned len) {
  static const char* hex = "0123456789abcdef";
  std::string out(2 * len, '0');
  for (unsigned i = 0; i < len; ++i) {
    out[2 * i] = hex[digest[i] >> 4];
    out[2 * i + 1] = hex[digest[i] & 0xf];
  }
  return out;
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    check_io(ctx_ != nullptr, "sha256: context allocation failed");
    EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr);
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, size_t len) { EVP_DigestUpdate(ctx_, data, len); }

  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned len = 0;
    EVP_DigestFinal_ex(ctx_, digest, &len);
    return to_hex(digest, len);
  }

 private:
  EVP_MD_CTX* ctx_;
};

void hash_stream(Sha256& h, std::istream& in) {
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h.update(buf, static_cast<size_t>(in.gcount()));
  }
}

}  // namespace

std::string sha256_hex(const void* data, size_t len) {
  Sha256 h;
  h.update(data, len);
  return h.hex();
}

std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

std::string sha256_file_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check_io(in.good(), "sha256: cannot open " + path.string());
  Sha256 h;
  hash_stream(h, in);
  return h.hex();
}

std::string sha256_tree_hex(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  check_io(fs::exists(root), "sha256: missing path " + root.string());
  if (fs::is_regular_file(root)) return sha256_file_hex(root);

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  Sha256 h;
  for (const auto& f : files) {
    const std::string rel = fs::relative(f, root).generic_string();
    h.update(rel.data(), rel.size());
    const std::string fh = sha256_file_hex(f);
    h.update(fh.data(), fh.size());
  }
  return h.hex();
}

}  // namespace xmodseg
