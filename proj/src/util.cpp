#include "rgt/util.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rgt/errors.hpp"

namespace rgt {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write: " + path.string());
}

std::vector<std::string> list_tree_files(const fs::path& root) {
    std::vector<std::string> files;
    if (!fs::exists(root)) throw Error("no such directory: " + root.string());
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        files.push_back(fs::relative(entry.path(), root).generic_string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

void copy_tree(const fs::path& from, const fs::path& to) {
    fs::create_directories(to);
    fs::copy(from, to,
             fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
            throw Error("sha256 init failed");
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* data, std::size_t len) {
        if (EVP_DigestUpdate(ctx_, data, len) != 1) throw Error("sha256 update failed");
    }
    void update(const std::string& s) { update(s.data(), s.size()); }

    std::string hex() {
        unsigned char out[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_, out, &len) != 1) throw Error("sha256 final failed");
        static const char* digits = "0123456789abcdef";
        std::string hexed(2 * len, '0');
        for (unsigned int i = 0; i < len; ++i) {
            hexed[2 * i] = digits[out[i] >> 4];
            hexed[2 * i + 1] = digits[out[i] & 0xF];
        }
        return hexed;
    }

private:
    EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    Sha256 h;
    h.update(bytes);
    return h.hex();
}

std::string digest_tree(const fs::path& root) {
    Sha256 h;
    for (const auto& rel : list_tree_files(root)) {
        const std::string content = read_file(root / rel);
        h.update(rel);
        h.update("\0", 1);
        h.update(std::to_string(content.size()));
        h.update("\0", 1);
        h.update(content);
    }
    return h.hex();
}

std::string digest_file(const fs::path& path) { return sha256_hex(read_file(path)); }

}  // namespace rgt
