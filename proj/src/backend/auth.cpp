#include "fridge/backend/auth.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>

#include <vector>

#include <fmt/format.h>

namespace fridge::backend {
namespace {

constexpr std::size_t kSaltBytes = 16;
constexpr std::size_t kKeyBytes = 32;
constexpr std::size_t kTokenBytes = 16;

std::vector<unsigned char> random_bytes(std::size_t n) {
  std::vector<unsigned char> out(n);
  if (RAND_bytes(out.data(), static_cast<int>(n)) != 1) throw std::runtime_error("RAND_bytes failed");
  return out;
}

std::string to_hex(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (const auto b : bytes) out += fmt::format("{:02x}", b);
  return out;
}

std::optional<std::vector<unsigned char>> from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  std::vector<unsigned char> out;
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    unsigned value = 0;
    for (std::size_t k = 0; k < 2; ++k) {
      const char c = hex[i + k];
      value <<= 4;
      if (c >= '0' && c <= '9') {
        value |= static_cast<unsigned>(c - '0');
      } else if (c >= 'a' && c <= 'f') {
        value |= static_cast<unsigned>(c - 'a' + 10);
      } else {
        return std::nullopt;
      }
    }
    out.push_back(static_cast<unsigned char>(value));
  }
  return out;
}

std::vector<unsigned char> derive(const std::string& password, const std::vector<unsigned char>& salt,
                                  int iterations) {
  std::vector<unsigned char> key(kKeyBytes);
  if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()), salt.data(),
                        static_cast<int>(salt.size()), iterations, EVP_sha256(), static_cast<int>(key.size()),
                        key.data()) != 1) {
    throw std::runtime_error("PBKDF2 failed");
  }
  return key;
}

}  // namespace

std::string hash_password(const std::string& password, int iterations) {
  if (iterations < 1) throw std::invalid_argument("iterations must be positive");
  const auto salt = random_bytes(kSaltBytes);
  return fmt::format("pbkdf2-sha256${}${}${}", iterations, to_hex(salt), to_hex(derive(password, salt, iterations)));
}

bool verify_password(const std::string& password, const std::string& encoded) {
  const std::string prefix = "pbkdf2-sha256$";
  if (encoded.rfind(prefix, 0) != 0) return false;
  const auto rest = encoded.substr(prefix.size());
  const auto d1 = rest.find('$');
  const auto d2 = rest.find('$', d1 == std::string::npos ? d1 : d1 + 1);
  if (d1 == std::string::npos || d2 == std::string::npos) return false;
  int iterations = 0;
  try {
    iterations = std::stoi(rest.substr(0, d1));
  } catch (const std::exception&) {
    return false;
  }
  const auto salt = from_hex(rest.substr(d1 + 1, d2 - d1 - 1));
  const auto expected = from_hex(rest.substr(d2 + 1));
  if (iterations < 1 || !salt || !expected || expected->size() != kKeyBytes) return false;
  const auto actual = derive(password, *salt, iterations);
  return CRYPTO_memcmp(actual.data(), expected->data(), kKeyBytes) == 0;
}

AuthService::AuthService(Store& store, AuthOptions options, Clock clock)
    : store_(store),
      options_(options),
      clock_(std::move(clock)),
      dummy_hash_(hash_password("not-a-real-password", options.pbkdf2_iterations)) {}

void AuthService::register_user(const std::string& username, const std::string& password) {
  if (username.empty()) throw AuthError(422, "username must not be empty");
  if (password.size() < 8) throw AuthError(422, "password must have at least 8 characters");
  if (store_.find_user(username)) throw AuthError(409, "username already registered");
  const auto created =
      std::chrono::duration_cast<std::chrono::seconds>(clock_().time_since_epoch()).count();
  if (!store_.add_user({username, hash_password(password, options_.pbkdf2_iterations), created})) {
    throw AuthError(409, "username already registered");
  }
}

LoginResult AuthService::login(const std::string& username, const std::string& password) {
  const auto user = store_.find_user(username);
  // Unknown users still pay for one hash so response times do not reveal
  // which usernames exist.
  const bool ok = verify_password(password, user ? user->password_hash : dummy_hash_) && user.has_value();
  if (!ok) throw AuthError(401, "invalid username or password");
  LoginResult result{to_hex(random_bytes(kTokenBytes)), {username, clock_() + options_.token_ttl}};
  std::lock_guard lock(sessions_mutex_);
  sessions_[result.token] = result.session;
  return result;
}

std::optional<AuthSession> AuthService::validate(const std::string& token) {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(token);
  if (it == sessions_.end()) return std::nullopt;
  if (clock_() >= it->second.expires_at) {
    sessions_.erase(it);
    return std::nullopt;
  }
  return it->second;
}

void AuthService::logout(const std::string& token) {
  std::lock_guard lock(sessions_mutex_);
  sessions_.erase(token);
}

}  // namespace fridge::backend
