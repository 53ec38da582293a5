#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>

#include "fridge/backend/store.hpp"

namespace fridge::backend {

/// Carries the HTTP status the API answers with: 401, 409 or 422.
class AuthError : public std::runtime_error {
 public:
  AuthError(int status, const std::string& message) : std::runtime_error(message), status_(status) {}
  [[nodiscard]] int status() const noexcept { return status_; }

 private:
  int status_;
};

struct AuthOptions {
  std::chrono::seconds token_ttl{24 * 60 * 60};
  int pbkdf2_iterations = 100'000;
};

/// "pbkdf2-sha256$<iterations>$<salt hex>$<hash hex>" with a 16-byte salt
/// and a 32-byte derived key.
std::string hash_password(const std::string& password, int iterations);
/// Constant-time comparison against an encoded hash. False when the
/// encoding is malformed.
bool verify_password(const std::string& password, const std::string& encoded);

struct AuthSession {
  std::string username;
  std::chrono::system_clock::time_point expires_at;
};

struct LoginResult {
  std::string token;
  AuthSession session;
};

/// Registration and login over the store's users collection, plus the
/// in-memory table of issued tokens.
class AuthService {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  explicit AuthService(Store& store, AuthOptions options = {}, Clock clock = std::chrono::system_clock::now);

  /// 422 for an empty username or a password under 8 characters, 409 when
  /// the username is taken.
  void register_user(const std::string& username, const std::string& password);

  /// A fresh 128-bit token, hex encoded. 401 for an unknown user or a wrong
  /// password; both cases run one full hash verification.
  LoginResult login(const std::string& username, const std::string& password);

  /// The session behind a live token; expired tokens are forgotten.
  std::optional<AuthSession> validate(const std::string& token);
  void logout(const std::string& token);

 private:
  Store& store_;
  AuthOptions options_;
  Clock clock_;
  std::string dummy_hash_;
  std::mutex sessions_mutex_;
  std::map<std::string, AuthSession> sessions_;
};

}  // namespace fridge::backend
