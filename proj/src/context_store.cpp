#include "convo/context_store.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

namespace convo {

VersionConflict::VersionConflict(const UserKey& key, std::uint64_t expected, std::uint64_t actual)
    : StoreError("version conflict for " + key.to_string() + ": context loaded at version " +
                 std::to_string(expected) + ", store has " + std::to_string(actual)),
      expected_(expected),
      actual_(actual) {}

CorruptRecord::CorruptRecord(const UserKey& key, const std::string& detail)
    : StoreError("corrupt context record for " + key.to_string() + ": " + detail), key_(key) {}

UserContext MemoryStore::load_or_create(const UserKey& key) {
    validate(key);
    std::lock_guard lock(mu_);
    auto it = records_.find(key);
    if (it == records_.end()) return fresh_context(key);
    return it->second;
}

std::uint64_t MemoryStore::save(const UserContext& ctx) {
    validate(ctx.key);
    std::lock_guard lock(mu_);
    auto it = records_.find(ctx.key);
    const std::uint64_t stored = it == records_.end() ? 0 : it->second.version;
    if (stored != ctx.version) throw VersionConflict(ctx.key, ctx.version, stored);
    UserContext copy = ctx;
    copy.version = stored + 1;
    records_[ctx.key] = std::move(copy);
    return stored + 1;
}

std::vector<UserKey> MemoryStore::keys() const {
    std::lock_guard lock(mu_);
    std::vector<UserKey> out;
    for (const auto& [k, _] : records_) out.push_back(k);
    return out;
}

std::string encode_path_component(std::string_view s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xF];
        }
    }
    return out;
}

std::string decode_path_component(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            out += static_cast<char>(std::stoi(std::string(s.substr(i + 1, 2)), nullptr, 16));
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
    static std::atomic<std::uint64_t> counter{0};
    std::filesystem::create_directories(path.parent_path());
    std::ostringstream tmp_name;
    tmp_name << path.filename().string() << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << "."
             << counter.fetch_add(1);
    const auto tmp = path.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StoreError("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw StoreError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw StoreError("cannot replace " + path.string() + ": " + ec.message());
    }
}

FileStore::FileStore(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec || !std::filesystem::is_directory(root_)) {
        throw StoreError("context store directory unavailable: " + root_.string());
    }
}

std::filesystem::path FileStore::path_for(const UserKey& key) const {
    return root_ / encode_path_component(key.channel_id) / (encode_path_component(key.user_id) + ".json");
}

std::mutex& FileStore::lock_for(const UserKey& key) {
    return stripes_[std::hash<std::string>{}(key.channel_id + '\x1f' + key.user_id) % stripes_.size()];
}

std::optional<UserContext> FileStore::read(const UserKey& key) const {
    const auto path = path_for(key);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (std::filesystem::exists(path)) throw StoreError("cannot read " + path.string());
        return std::nullopt;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    Json j = Json::parse(buf.str(), nullptr, false);
    if (j.is_discarded()) throw CorruptRecord(key, "malformed JSON");
    try {
        UserContext ctx = context_from_json(j);
        if (ctx.key != key) throw CorruptRecord(key, "record belongs to " + ctx.key.to_string());
        return ctx;
    } catch (const CorruptRecord&) {
        throw;
    } catch (const std::exception& e) {
        throw CorruptRecord(key, e.what());
    }
}

UserContext FileStore::load_or_create(const UserKey& key) {
    validate(key);
    std::lock_guard lock(lock_for(key));
    if (auto ctx = read(key)) return *ctx;
    return fresh_context(key);
}

std::uint64_t FileStore::save(const UserContext& ctx) {
    validate(ctx.key);
    std::lock_guard lock(lock_for(ctx.key));
    const auto existing = read(ctx.key);
    const std::uint64_t stored = existing ? existing->version : 0;
    if (stored != ctx.version) throw VersionConflict(ctx.key, ctx.version, stored);
    UserContext copy = ctx;
    copy.version = stored + 1;
    write_file_atomically(path_for(ctx.key), canonical_dump(to_json(copy)));
    return copy.version;
}

std::vector<UserKey> FileStore::keys() const {
    std::vector<UserKey> out;
    for (const auto& channel : std::filesystem::directory_iterator(root_)) {
        if (!channel.is_directory()) continue;
        for (const auto& f : std::filesystem::directory_iterator(channel.path())) {
            if (f.path().extension() != ".json") continue;
            out.push_back({decode_path_component(channel.path().filename().string()),
                           decode_path_component(f.path().stem().string())});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace convo
