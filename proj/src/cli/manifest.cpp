#include "fcm/cli/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "fcm/error.hpp"

#ifndef FCM_VERSION
#define FCM_VERSION "unknown"
#endif

namespace fcm::app {

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot hash '" + path.string() + "'");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

std::string version_string() { return FCM_VERSION; }

void Manifest::write(const std::filesystem::path& path) const {
    auto files = [](const std::vector<std::filesystem::path>& ps) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : ps) arr.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
        return arr;
    };
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    nlohmann::json j = {{"command", command},   {"version", version_string()}, {"created", ts.str()},
                        {"seed", seed},         {"config", config},            {"inputs", files(inputs)},
                        {"outputs", files(outputs)}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace fcm::app
