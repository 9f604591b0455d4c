#include "convo/state_queue.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "convo/nlu.hpp"

namespace convo {

void StateQueue::push(DialogState state) {
    if (state.name.empty()) throw std::invalid_argument("dialog state name empty");
    if (state.lifetime && *state.lifetime < 1) {
        throw std::invalid_argument("dialog state '" + state.name + "' pushed with expired lifetime");
    }
    remove(state.name);
    entries_.push_back({std::move(state), next_seq_++});
    sort();
}

bool StateQueue::remove(std::string_view name) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.state.name == name; });
    if (it == entries_.end()) return false;
    entries_.erase(it);
    return true;
}

void StateQueue::tick(std::string_view intent) {
    if (intent == kFallbackIntent) return;
    for (auto& e : entries_) {
        if (e.state.lifetime) --*e.state.lifetime;
    }
    std::erase_if(entries_, [](const Entry& e) { return e.state.lifetime && *e.state.lifetime <= 0; });
}

const DialogState* StateQueue::find(std::string_view name) const {
    for (const auto& e : entries_) {
        if (e.state.name == name) return &e.state;
    }
    return nullptr;
}

std::vector<DialogState> StateQueue::states() const {
    std::vector<DialogState> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.state);
    return out;
}

std::vector<std::string> StateQueue::names() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.state.name);
    return out;
}

bool StateQueue::valid() const {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.state.name.empty() || !seen.insert(e.state.name).second) return false;
        if (e.state.lifetime && *e.state.lifetime <= 0) return false;
        if (i > 0) {
            const auto& prev = entries_[i - 1];
            if (prev.state.priority < e.state.priority) return false;
            if (prev.state.priority == e.state.priority && prev.seq < e.seq) return false;
        }
    }
    return true;
}

void StateQueue::sort() {
    std::stable_sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
        if (a.state.priority != b.state.priority) return a.state.priority > b.state.priority;
        return a.seq > b.seq;
    });
}

Json StateQueue::to_json() const {
    Json arr = Json::array();
    for (const auto& e : entries_) {
        Json s{{"name", e.state.name}, {"priority", e.state.priority}, {"seq", e.seq}, {"payload", e.state.payload}};
        s["lifetime"] = e.state.lifetime ? Json(*e.state.lifetime) : Json(nullptr);
        arr.push_back(std::move(s));
    }
    return Json{{"next_seq", next_seq_}, {"states", std::move(arr)}};
}

StateQueue StateQueue::from_json(const Json& j) {
    StateQueue q;
    q.next_seq_ = j.at("next_seq").get<std::uint64_t>();
    for (const auto& s : j.at("states")) {
        DialogState st;
        st.name = s.at("name").get<std::string>();
        st.priority = s.at("priority").get<int>();
        if (!s.at("lifetime").is_null()) st.lifetime = s.at("lifetime").get<int>();
        st.payload = s.value("payload", std::map<std::string, std::string>{});
        q.entries_.push_back({std::move(st), s.at("seq").get<std::uint64_t>()});
    }
    q.sort();
    if (!q.valid()) throw std::invalid_argument("state queue record violates queue invariants");
    return q;
}

bool StateQueue::operator==(const StateQueue& other) const {
    if (entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!(entries_[i].state == other.entries_[i].state)) return false;
    }
    return true;
}

StateQueue tick_lifetimes(StateQueue queue, std::string_view intent) {
    queue.tick(intent);
    return queue;
}

}  // namespace convo
