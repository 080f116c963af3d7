#include "curio/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace curio::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) throw ConfigError("'" + key + "': cannot parse '" + text + "'");
    return value;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

struct Field {
    const char* key;
    std::function<void(agent::RunConfig&, const KeyValues&, const std::string&)> read;
    std::function<std::string(const agent::RunConfig&)> write;
};

template <typename Member>
Field int_field(const char* key, Member member) {
    return {key,
            [member](agent::RunConfig& c, const KeyValues& kv, const std::string& k) {
                using T = std::remove_reference_t<decltype(member(c))>;
                const long long v = kv.get_int(k);
                if (std::is_unsigned_v<T> && v < 0) throw ConfigError("'" + k + "' must be non-negative");
                member(c) = static_cast<T>(v);
            },
            [member](const agent::RunConfig& c) {
                return std::to_string(member(const_cast<agent::RunConfig&>(c)));
            }};
}

template <typename Member>
Field u64_field(const char* key, Member member) {
    return {key, [member](agent::RunConfig& c, const KeyValues& kv, const std::string& k) { member(c) = kv.get_u64(k); },
            [member](const agent::RunConfig& c) {
                return std::to_string(member(const_cast<agent::RunConfig&>(c)));
            }};
}

template <typename Member>
Field double_field(const char* key, Member member) {
    return {key,
            [member](agent::RunConfig& c, const KeyValues& kv, const std::string& k) { member(c) = kv.get_double(k); },
            [member](const agent::RunConfig& c) { return format_double(member(const_cast<agent::RunConfig&>(c))); }};
}

template <typename Member>
Field bool_field(const char* key, Member member) {
    return {key, [member](agent::RunConfig& c, const KeyValues& kv, const std::string& k) { member(c) = kv.get_bool(k); },
            [member](const agent::RunConfig& c) {
                return std::string(member(const_cast<agent::RunConfig&>(c)) ? "true" : "false");
            }};
}

#define CURIO_MEMBER(expr) [](agent::RunConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        int_field("world.grid_w", CURIO_MEMBER(world.grid_w)),
        int_field("world.grid_h", CURIO_MEMBER(world.grid_h)),
        int_field("world.img_w", CURIO_MEMBER(world.img_w)),
        int_field("world.img_h", CURIO_MEMBER(world.img_h)),
        int_field("world.blobs", CURIO_MEMBER(world.blob_count)),
        double_field("world.blob_radius_min", CURIO_MEMBER(world.blob_radius_min)),
        double_field("world.blob_radius_max", CURIO_MEMBER(world.blob_radius_max)),
        double_field("world.amplitude_min", CURIO_MEMBER(world.amplitude_min)),
        double_field("world.amplitude_max", CURIO_MEMBER(world.amplitude_max)),
        double_field("world.window_fraction", CURIO_MEMBER(world.window_fraction)),
        double_field("world.x_min_mm", CURIO_MEMBER(world.extent.x_min)),
        double_field("world.x_max_mm", CURIO_MEMBER(world.extent.x_max)),
        double_field("world.y_min_mm", CURIO_MEMBER(world.extent.y_min)),
        double_field("world.y_max_mm", CURIO_MEMBER(world.extent.y_max)),
        u64_field("world.seed", CURIO_MEMBER(world_seed)),
        int_field("encoder.latent_dim", CURIO_MEMBER(latent_dim)),
        int_field("encoder.epochs", CURIO_MEMBER(pretrain.epochs)),
        int_field("encoder.minibatch", CURIO_MEMBER(pretrain.minibatch)),
        double_field("encoder.lr", CURIO_MEMBER(pretrain.adam.learning_rate)),
        double_field("encoder.holdout", CURIO_MEMBER(pretrain_holdout)),
        int_field("loop.iterations", CURIO_MEMBER(iterations)),
        int_field("loop.buffer_len", CURIO_MEMBER(buffer_len)),
        int_field("loop.eval_every", CURIO_MEMBER(eval_every)),
        int_field("loop.testset_size", CURIO_MEMBER(testset_size)),
        double_field("loop.motor_noise_sigma", CURIO_MEMBER(motor_noise_sigma)),
        int_field("loop.samples_per_move", CURIO_MEMBER(samples_per_move)),
        bool_field("loop.train_on_trajectory", CURIO_MEMBER(train_on_trajectory)),
        u64_field("loop.seed", CURIO_MEMBER(seed)),
        int_field("goals.n", CURIO_MEMBER(n_goals)),
        double_field("goals.decay", CURIO_MEMBER(policy.decay)),
        double_field("goals.epsilon", CURIO_MEMBER(policy.epsilon_goal)),
        double_field("goals.p_random_move", CURIO_MEMBER(policy.p_random_move)),
        int_field("memory.batches", CURIO_MEMBER(mem_batches)),
        double_field("memory.p_em", CURIO_MEMBER(p_em)),
        bool_field("memory.update_per_batch", CURIO_MEMBER(memory_update_per_batch)),
        double_field("models.lr", CURIO_MEMBER(models.sgd.learning_rate)),
        double_field("models.momentum", CURIO_MEMBER(models.sgd.momentum)),
        double_field("models.decay", CURIO_MEMBER(models.sgd.decay)),
        int_field("models.minibatch", CURIO_MEMBER(models.minibatch)),
        int_field("models.epochs_per_fit", CURIO_MEMBER(models.epochs_per_fit)),
        int_field("models.hidden_small", CURIO_MEMBER(models.hidden_small)),
        int_field("models.hidden_large", CURIO_MEMBER(models.hidden_large)),
    };
    return table;
}

#undef CURIO_MEMBER

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

KeyValues KeyValues::parse(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        kv.values_[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

const std::string& KeyValues::raw(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
    return it->second;
}

double KeyValues::get_double(const std::string& key) const { return parse_number<double>(key, raw(key)); }
long long KeyValues::get_int(const std::string& key) const { return parse_number<long long>(key, raw(key)); }
std::uint64_t KeyValues::get_u64(const std::string& key) const { return parse_number<std::uint64_t>(key, raw(key)); }

bool KeyValues::get_bool(const std::string& key) const {
    const std::string& v = raw(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> KeyValues::get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(raw(key))) out.push_back(parse_number<double>(key, item));
    if (out.empty()) throw ConfigError("'" + key + "': empty list");
    return out;
}

std::vector<long long> KeyValues::get_ints(const std::string& key) const {
    std::vector<long long> out;
    for (const auto& item : split_list(raw(key))) out.push_back(parse_number<long long>(key, item));
    if (out.empty()) throw ConfigError("'" + key + "': empty list");
    return out;
}

std::string KeyValues::to_text() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

void apply(agent::RunConfig& cfg, const KeyValues& kv, const std::vector<std::string>& passthrough_prefixes) {
    for (const auto& [key, value] : kv.entries()) {
        bool known = false;
        for (const auto& f : fields()) {
            if (key == f.key) {
                f.read(cfg, kv, key);
                known = true;
                break;
            }
        }
        if (known) continue;
        bool passthrough = false;
        for (const auto& p : passthrough_prefixes)
            if (key.rfind(p, 0) == 0) passthrough = true;
        if (!passthrough) throw ConfigError("unknown config key '" + key + "'");
    }
    cfg.models.latent_dim = cfg.latent_dim;
}

KeyValues to_key_values(const agent::RunConfig& cfg) {
    KeyValues kv;
    for (const auto& f : fields()) kv.set(f.key, f.write(cfg));
    return kv;
}

}  // namespace curio::config
