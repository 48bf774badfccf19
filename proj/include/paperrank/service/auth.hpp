#pragma once

// Password hashing and bearer-token sessions.

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <charconv>
#include <chrono>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "paperrank/date.hpp"
#include "paperrank/digest.hpp"
#include "paperrank/error.hpp"

namespace paperrank::service {

inline std::vector<unsigned char> random_bytes(std::size_t n) {
  std::vector<unsigned char> out(n);
  if (RAND_bytes(out.data(), static_cast<int>(n)) != 1) throw Error("RAND_bytes failed");
  return out;
}

inline std::vector<unsigned char> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw ValidationError("odd-length hex string");
  std::vector<unsigned char> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto [p, ec] = std::from_chars(hex.data() + 2 * i, hex.data() + 2 * i + 2, out[i], 16);
    if (ec != std::errc{} || p != hex.data() + 2 * i + 2) throw ValidationError("bad hex string");
  }
  return out;
}

/// Stored as "pbkdf2-sha256$<iterations>$<hex>" so the work factor can be
/// raised without invalidating existing accounts.
inline std::string hash_password(std::string_view password, std::string_view salt_hex, int iterations) {
  if (iterations < 1) throw ConfigError("pbkdf2 iterations must be >= 1");
  auto salt = from_hex(salt_hex);
  std::vector<unsigned char> out(32);
  if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()), salt.data(),
                        static_cast<int>(salt.size()), iterations, EVP_sha256(), static_cast<int>(out.size()),
                        out.data()) != 1)
    throw Error("pbkdf2 failed");
  return "pbkdf2-sha256$" + std::to_string(iterations) + "$" + to_hex(out);
}

inline bool verify_password(std::string_view password, std::string_view salt_hex, std::string_view stored) {
  constexpr std::string_view prefix = "pbkdf2-sha256$";
  if (!stored.starts_with(prefix)) return false;
  auto rest = stored.substr(prefix.size());
  auto dollar = rest.find('$');
  if (dollar == std::string_view::npos) return false;
  int iterations = 0;
  auto [p, ec] = std::from_chars(rest.data(), rest.data() + dollar, iterations);
  if (ec != std::errc{} || p != rest.data() + dollar || iterations < 1) return false;
  auto fresh = hash_password(password, salt_hex, iterations);
  return fresh.size() == stored.size() && CRYPTO_memcmp(fresh.data(), stored.data(), fresh.size()) == 0;
}

struct Session {
  std::string token;
  std::string user_id;
  Instant expires{};
};

/// In-memory token table. Tokens carry 256 random bits; a restart logs
/// everyone out.
class SessionStore {
 public:
  explicit SessionStore(std::chrono::seconds ttl) : ttl_(ttl) {
    if (ttl_.count() <= 0) throw ConfigError("session ttl must be positive");
  }

  Session issue(const std::string& user_id, Instant now) {
    Session s{to_hex(random_bytes(32)), user_id, now + ttl_};
    std::lock_guard lock(mu_);
    sessions_[s.token] = s;
    return s;
  }

  /// Throws AuthError for an unknown or expired token.
  std::string resolve(const std::string& token, Instant now) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(token);
    if (it == sessions_.end()) throw AuthError("invalid token");
    if (now >= it->second.expires) {
      sessions_.erase(it);
      throw AuthError("token expired");
    }
    return it->second.user_id;
  }

  void revoke(const std::string& token) {
    std::lock_guard lock(mu_);
    sessions_.erase(token);
  }

 private:
  std::chrono::seconds ttl_;
  std::mutex mu_;
  std::unordered_map<std::string, Session> sessions_;
};

}  // namespace paperrank::service
