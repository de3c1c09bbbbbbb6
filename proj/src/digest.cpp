#include "xaieval/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

#include "xaieval/raster_io.hpp"

namespace xaieval {

struct Sha256::Impl {
    EVP_MD_CTX* ctx = nullptr;
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
    impl_->ctx = EVP_MD_CTX_new();
    if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 initialisation failed");
    }
}

Sha256::~Sha256() {
    EVP_MD_CTX_free(impl_->ctx);
}

Sha256& Sha256::update(std::span<const std::uint8_t> bytes) {
    EVP_DigestUpdate(impl_->ctx, bytes.data(), bytes.size());
    return *this;
}

Sha256& Sha256::update(std::string_view text) {
    EVP_DigestUpdate(impl_->ctx, text.data(), text.size());
    return *this;
}

Sha256& Sha256::field(std::string_view text) {
    update(std::to_string(text.size()));
    update(":");
    return update(text);
}

Sha256& Sha256::file(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    update(std::to_string(bytes.size()));
    update(":");
    return update(bytes);
}

std::string Sha256::hex_digest() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(impl_->ctx, md, &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    return Sha256().update(bytes).hex_digest();
}

std::string sha256_hex(std::string_view text) {
    return Sha256().update(text).hex_digest();
}

}  // namespace xaieval
