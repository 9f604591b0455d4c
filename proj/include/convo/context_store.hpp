#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "convo/context.hpp"

namespace convo {

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The stored version moved since the context was loaded: two turns for the
/// same user ran concurrently.
class VersionConflict : public StoreError {
public:
    VersionConflict(const UserKey& key, std::uint64_t expected, std::uint64_t actual);
    std::uint64_t expected() const noexcept { return expected_; }
    std::uint64_t actual() const noexcept { return actual_; }

private:
    std::uint64_t expected_;
    std::uint64_t actual_;
};

class CorruptRecord : public StoreError {
public:
    CorruptRecord(const UserKey& key, const std::string& detail);
    const UserKey& key() const noexcept { return key_; }

private:
    UserKey key_;
};

/// Per-user context persistence with optimistic versioning: `save` succeeds
/// only when the stored version equals `ctx.version`, and returns the new
/// (incremented) version.
class ContextStore {
public:
    virtual ~ContextStore() = default;
    virtual UserContext load_or_create(const UserKey& key) = 0;
    virtual std::uint64_t save(const UserContext& ctx) = 0;
    virtual std::vector<UserKey> keys() const = 0;
};

class MemoryStore final : public ContextStore {
public:
    UserContext load_or_create(const UserKey& key) override;
    std::uint64_t save(const UserContext& ctx) override;
    std::vector<UserKey> keys() const override;

private:
    mutable std::mutex mu_;
    std::map<UserKey, UserContext> records_;
};

/// One canonical JSON file per user under `root/<channel>/<user>.json`.
/// Identifiers are percent-encoded into file names.
class FileStore final : public ContextStore {
public:
    explicit FileStore(std::filesystem::path root);

    UserContext load_or_create(const UserKey& key) override;
    std::uint64_t save(const UserContext& ctx) override;
    std::vector<UserKey> keys() const override;

    std::filesystem::path path_for(const UserKey& key) const;
    const std::filesystem::path& root() const noexcept { return root_; }

private:
    std::mutex& lock_for(const UserKey& key);
    std::optional<UserContext> read(const UserKey& key) const;

    std::filesystem::path root_;
    std::array<std::mutex, 64> stripes_;
};

std::string encode_path_component(std::string_view s);
std::string decode_path_component(std::string_view s);

/// Write-then-rename so readers never see a partial file.
void write_file_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace convo
