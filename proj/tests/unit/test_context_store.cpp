#include <doctest.h>

#include <fstream>
#include <thread>

#include "convo/context_store.hpp"
#include "support/helpers.hpp"

using namespace convo;

namespace {

void exercise_versioning(ContextStore& store) {
    auto ctx = store.load_or_create({"c", "u"});
    CHECK(ctx.version == 0);
    ctx.slots["a"] = "1";
    CHECK(store.save(ctx) == 1);

    auto again = store.load_or_create({"c", "u"});
    CHECK(again.version == 1);
    CHECK(again.slots.at("a") == "1");

    // `ctx` still carries version 0: a lost update.
    CHECK_THROWS_AS(store.save(ctx), VersionConflict);
    try {
        store.save(ctx);
    } catch (const VersionConflict& e) {
        CHECK(e.expected() == 0);
        CHECK(e.actual() == 1);
    }
    CHECK(store.save(again) == 2);
    CHECK(store.keys() == std::vector<UserKey>{{"c", "u"}});
}

void exercise_concurrent_users(ContextStore& store) {
    std::vector<std::thread> threads;
    for (int u = 0; u < 16; ++u) {
        threads.emplace_back([&store, u] {
            const UserKey key{"c", "user" + std::to_string(u)};
            for (int i = 0; i < 25; ++i) {
                auto ctx = store.load_or_create(key);
                ctx.slots["n"] = std::to_string(i);
                store.save(ctx);
            }
        });
    }
    for (auto& t : threads) t.join();
    for (int u = 0; u < 16; ++u) {
        const auto ctx = store.load_or_create({"c", "user" + std::to_string(u)});
        CHECK(ctx.version == 25);
        CHECK(ctx.slots.at("n") == "24");
    }
}

}  // namespace

TEST_CASE("memory store versioning") {
    MemoryStore store;
    exercise_versioning(store);
}

TEST_CASE("file store versioning") {
    testing::TempDir dir("ctx");
    FileStore store(dir.path());
    exercise_versioning(store);
    // A second store over the same directory sees the same record.
    FileStore other(dir.path());
    CHECK(other.load_or_create({"c", "u"}).version == 2);
}

TEST_CASE("distinct users do not interfere") {
    MemoryStore mem;
    exercise_concurrent_users(mem);
    testing::TempDir dir("ctx-threads");
    FileStore files(dir.path());
    exercise_concurrent_users(files);
}

TEST_CASE("awkward identifiers map to safe, reversible file names") {
    for (const std::string s : {"plain", "a/b", "..", "ü ñ", "x%41", "con", ".hidden"}) {
        const auto enc = encode_path_component(s);
        CHECK(decode_path_component(enc) == s);
        CHECK(enc.find('/') == std::string::npos);
        CHECK(enc != "..");
        CHECK(enc != ".");
    }
    testing::TempDir dir("ctx-names");
    FileStore store(dir.path());
    const UserKey key{"../etc", "a/b"};
    auto ctx = store.load_or_create(key);
    store.save(ctx);
    const auto path = store.path_for(key);
    CHECK(std::filesystem::exists(path));
    CHECK(std::filesystem::weakly_canonical(path).string().rfind(std::filesystem::weakly_canonical(dir.path()).string(), 0) == 0);
    CHECK(store.keys() == std::vector<UserKey>{key});
}

TEST_CASE("corrupt records are reported, not silently reset") {
    testing::TempDir dir("ctx-corrupt");
    FileStore store(dir.path());
    const UserKey key{"c", "u"};
    store.save(store.load_or_create(key));
    std::ofstream(store.path_for(key)) << "{\"half\": ";
    CHECK_THROWS_AS(store.load_or_create(key), CorruptRecord);
}

TEST_CASE("atomic write leaves no temp files behind") {
    testing::TempDir dir("atomic");
    write_file_atomically(dir.path() / "f.json", "abc");
    write_file_atomically(dir.path() / "f.json", "def");
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++n;
    CHECK(n == 1);
    std::ifstream in(dir.path() / "f.json");
    std::string body;
    in >> body;
    CHECK(body == "def");
}
