#include "convo/bot.hpp"

#include <functional>

namespace convo {

std::filesystem::path BotConfig::catalog_file() const {
    return catalog_path ? *catalog_path : data_dir / language / "catalog.json";
}

std::filesystem::path BotConfig::templates_file() const {
    return templates_path ? *templates_path : data_dir / language / "templates.json";
}

namespace {

std::shared_ptr<const Catalog> load_catalog(const BotConfig& config) {
    auto catalog = std::make_shared<const Catalog>(Catalog::load(config.catalog_file()));
    if (catalog->language() != config.language) {
        throw CatalogError("catalog language '" + catalog->language() + "' does not match bot language '" +
                           config.language + "'");
    }
    return catalog;
}

std::shared_ptr<const claim::Scenario> load_scenario(const BotConfig& config, const Catalog& catalog) {
    auto scenario = std::make_shared<const claim::Scenario>(claim::Scenario::load(config.data_dir, config.language));
    auto problems = claim::cross_check(*scenario, catalog);
    if (!problems.empty()) throw CatalogError("scenario data inconsistent: " + problems.front());
    return scenario;
}

}  // namespace

Bot::Bot(const BotConfig& config, std::shared_ptr<ContextStore> contexts, std::shared_ptr<claim::ClaimStore> claims)
    : catalog_(load_catalog(config)),
      nlu_(catalog_),
      scenario_(load_scenario(config, *catalog_)),
      responder_(std::make_shared<const TemplateSource>(config.templates_file(), config.reload_templates)),
      rules_(claim::build_rules(scenario_, responder_.table().get())),
      contexts_(std::move(contexts)),
      claims_(std::move(claims)),
      effects_(claims_) {
    if (responder_.table()->language() != config.language) {
        throw TemplateError("", "template language '" + responder_.table()->language() +
                                    "' does not match bot language '" + config.language + "'");
    }
    options_.seed = config.seed;
    options_.history_limit = config.history_limit;
}

std::mutex& Bot::gate_for(const UserKey& key) {
    return gates_[std::hash<std::string>{}(key.channel_id + '\x1f' + key.user_id) % gates_.size()];
}

StepResult Bot::handle(const InboundMessage& msg) {
    validate(msg);
    const UserKey& key = msg.key;
    std::lock_guard lock(gate_for(key));
    auto ctx = contexts_->load_or_create(key);
    auto result = step(std::move(ctx), msg, nlu_, rules_, responder_, &effects_, options_);
    result.context.version = contexts_->save(result.context);
    return result;
}

}  // namespace convo
