#include "recsmith/models/registry.hpp"

#include <cstring>
#include <fstream>

#include "recsmith/error.hpp"
#include "recsmith/models/als.hpp"
#include "recsmith/models/assoc_rules.hpp"
#include "recsmith/models/item_knn.hpp"
#include "recsmith/models/nonpersonalized.hpp"
#include "recsmith/models/slim.hpp"

namespace recsmith {

namespace {

using nlohmann::json;

void check_keys(const json& params, const std::string& name,
                std::initializer_list<const char*> allowed) {
    if (params.is_null()) return;
    if (!params.is_object()) {
        raise(ErrorCode::ConfigError, "params for model '" + name + "' must be an object");
    }
    for (const auto& [key, value] : params.items()) {
        if (key == "name") continue;  // tolerated so a config model object can be passed whole
        bool ok = false;
        for (const char* a : allowed) ok |= key == a;
        if (!ok) {
            raise(ErrorCode::ConfigError,
                  "model '" + name + "' does not take a parameter '" + key + "'");
        }
    }
}

template <typename T>
T get_or(const json& params, const char* key, T fallback) {
    if (params.is_object() && params.contains(key)) {
        try {
            return params.at(key).get<T>();
        } catch (const json::exception&) {
            raise(ErrorCode::ConfigError, std::string("bad value for parameter '") + key + "'");
        }
    }
    return fallback;
}

}  // namespace

std::unique_ptr<Recommender> make_model(const std::string& name, const json& params) {
    if (name == "pop_rec") {
        check_keys(params, name, {"count_mode"});
        const std::string mode = get_or<std::string>(params, "count_mode", "distinct_users");
        if (mode != "distinct_users" && mode != "interactions") {
            raise(ErrorCode::ConfigError, "pop_rec count_mode must be distinct_users|interactions");
        }
        return std::make_unique<PopRec>(mode == "distinct_users"
                                            ? PopRec::CountMode::DistinctUsers
                                            : PopRec::CountMode::Interactions);
    }
    if (name == "query_pop_rec") {
        check_keys(params, name, {});
        return std::make_unique<QueryPopRec>();
    }
    if (name == "wilson") {
        check_keys(params, name, {"z"});
        return std::make_unique<WilsonRec>(get_or<double>(params, "z", 1.96));
    }
    if (name == "ucb") {
        check_keys(params, name, {"c"});
        return std::make_unique<UcbRec>(get_or<double>(params, "c", 2.0));
    }
    if (name == "klucb") {
        check_keys(params, name, {});
        return std::make_unique<KlUcbRec>();
    }
    if (name == "thompson") {
        check_keys(params, name, {"seed"});
        return std::make_unique<ThompsonRec>(get_or<std::uint64_t>(params, "seed", 0));
    }
    if (name == "item_knn") {
        check_keys(params, name, {"num_neighbors", "shrink", "use_ratings"});
        ItemKnn::Params p;
        p.num_neighbors = get_or<std::int32_t>(params, "num_neighbors", p.num_neighbors);
        p.shrink = get_or<double>(params, "shrink", p.shrink);
        p.use_ratings = get_or<bool>(params, "use_ratings", p.use_ratings);
        return std::make_unique<ItemKnn>(p);
    }
    if (name == "slim") {
        check_keys(params, name, {"l1", "l2", "max_iters", "tol", "nonnegative", "use_ratings"});
        Slim::Params p;
        p.l1 = get_or<double>(params, "l1", p.l1);
        p.l2 = get_or<double>(params, "l2", p.l2);
        p.max_iters = get_or<std::int32_t>(params, "max_iters", p.max_iters);
        p.tol = get_or<double>(params, "tol", p.tol);
        p.nonnegative = get_or<bool>(params, "nonnegative", p.nonnegative);
        p.use_ratings = get_or<bool>(params, "use_ratings", p.use_ratings);
        return std::make_unique<Slim>(p);
    }
    if (name == "als") {
        check_keys(params, name, {"rank", "alpha", "lambda", "iterations", "seed", "use_ratings"});
        Als::Params p;
        p.rank = get_or<std::int32_t>(params, "rank", p.rank);
        p.alpha = get_or<double>(params, "alpha", p.alpha);
        p.lambda = get_or<double>(params, "lambda", p.lambda);
        p.iterations = get_or<std::int32_t>(params, "iterations", p.iterations);
        p.seed = get_or<std::uint64_t>(params, "seed", p.seed);
        p.use_ratings = get_or<bool>(params, "use_ratings", p.use_ratings);
        return std::make_unique<Als>(p);
    }
    if (name == "association_rules" || name == "assoc_rules") {
        check_keys(params, name, {"min_pair_count", "metric", "use_ratings"});
        AssociationRules::Params p;
        p.min_pair_count = get_or<std::int64_t>(params, "min_pair_count", p.min_pair_count);
        p.metric = parse_rule_metric(get_or<std::string>(params, "metric", "confidence"));
        p.use_ratings = get_or<bool>(params, "use_ratings", p.use_ratings);
        return std::make_unique<AssociationRules>(p);
    }
    raise(ErrorCode::UnknownModel, "unknown model '" + name + "'");
}

// ---- binary archive --------------------------------------------------------

namespace {

constexpr char kMagic[5] = {'R', 'S', 'M', 'H', '1'};

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) raise(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    }

    void bytes(const void* data, std::size_t n) {
        out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u64(std::uint64_t v) {
        std::uint8_t buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
        bytes(buf, 8);
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void i32(std::int32_t v) { u64(static_cast<std::uint64_t>(static_cast<std::uint32_t>(v))); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void str(const std::string& s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }
    void vec_i64(const std::vector<std::int64_t>& v) {
        u64(v.size());
        for (std::int64_t x : v) i64(x);
    }
    void vec_i32(const std::vector<std::int32_t>& v) {
        u64(v.size());
        for (std::int32_t x : v) i32(x);
    }
    void vec_f64(const std::vector<double>& v) {
        u64(v.size());
        for (double x : v) f64(x);
    }

    bool good() const { return static_cast<bool>(out_); }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) raise(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    }

    void bytes(void* data, std::size_t n) {
        in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n)) {
            raise(ErrorCode::BadModelFile, "model file truncated");
        }
    }
    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }
    std::uint64_t u64() {
        std::uint8_t buf[8];
        bytes(buf, 8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(u64())); }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        const std::uint64_t n = u64();
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    std::vector<std::int64_t> vec_i64() {
        std::vector<std::int64_t> v(u64());
        for (auto& x : v) x = i64();
        return v;
    }
    std::vector<std::int32_t> vec_i32() {
        std::vector<std::int32_t> v(u64());
        for (auto& x : v) x = i32();
        return v;
    }
    std::vector<double> vec_f64() {
        std::vector<double> v(u64());
        for (auto& x : v) x = f64();
        return v;
    }

private:
    std::ifstream in_;
};

void write_matrix(Writer& w, const SparseInteractionMatrix& m) {
    w.i32(m.n_rows);
    w.i32(m.n_cols);
    w.vec_i64(m.row_ptr);
    w.vec_i32(m.col_idx);
    w.vec_f64(m.values);
}

SparseInteractionMatrix read_matrix(Reader& r) {
    SparseInteractionMatrix m;
    m.n_rows = r.i32();
    m.n_cols = r.i32();
    m.row_ptr = r.vec_i64();
    m.col_idx = r.vec_i32();
    m.values = r.vec_f64();
    return m;
}

}  // namespace

/// Private-state access for serialization; friended by every model class.
class ModelArchive {
public:
    static json params_json(const Recommender& model) {
        json p = json::object();
        if (const auto* m = dynamic_cast<const PopRec*>(&model)) {
            p["count_mode"] = m->count_mode() == PopRec::CountMode::DistinctUsers
                                  ? "distinct_users"
                                  : "interactions";
        } else if (const auto* m = dynamic_cast<const WilsonRec*>(&model)) {
            p["z"] = m->z();
        } else if (const auto* m = dynamic_cast<const UcbRec*>(&model)) {
            p["c"] = m->exploration();
        } else if (const auto* m = dynamic_cast<const ThompsonRec*>(&model)) {
            p["seed"] = m->seed();
        } else if (const auto* m = dynamic_cast<const ItemKnn*>(&model)) {
            p["num_neighbors"] = m->params().num_neighbors;
            p["shrink"] = m->params().shrink;
            p["use_ratings"] = m->params().use_ratings;
        } else if (const auto* m = dynamic_cast<const Slim*>(&model)) {
            p["l1"] = m->params().l1;
            p["l2"] = m->params().l2;
            p["max_iters"] = m->params().max_iters;
            p["tol"] = m->params().tol;
            p["nonnegative"] = m->params().nonnegative;
            p["use_ratings"] = m->params().use_ratings;
        } else if (const auto* m = dynamic_cast<const Als*>(&model)) {
            p["rank"] = m->params().rank;
            p["alpha"] = m->params().alpha;
            p["lambda"] = m->params().lambda;
            p["iterations"] = m->params().iterations;
            p["seed"] = m->params().seed;
            p["use_ratings"] = m->params().use_ratings;
        } else if (const auto* m = dynamic_cast<const AssociationRules*>(&model)) {
            p["min_pair_count"] = m->params().min_pair_count;
            p["metric"] = m->params().metric == RuleMetric::Lift ? "lift" : "confidence";
            p["use_ratings"] = m->params().use_ratings;
        }
        return p;
    }

    static void save_state(Writer& w, const Recommender& model) {
        w.i32(model.n_queries_);
        w.i32(model.n_items_);
        write_matrix(w, model.history_);

        if (const auto* m = dynamic_cast<const PopRec*>(&model)) {
            w.vec_f64(m->scores_);
        } else if (const auto* m = dynamic_cast<const QueryPopRec*>(&model)) {
            w.vec_f64(m->shares_);
        } else if (const auto* m = dynamic_cast<const WilsonRec*>(&model)) {
            w.vec_f64(m->scores_);
        } else if (const auto* m = dynamic_cast<const UcbRec*>(&model)) {
            w.vec_f64(m->scores_);
        } else if (const auto* m = dynamic_cast<const KlUcbRec*>(&model)) {
            w.vec_f64(m->scores_);
        } else if (const auto* m = dynamic_cast<const ThompsonRec*>(&model)) {
            w.vec_i64(m->n_pos_);
            w.vec_i64(m->n_fail_);
        } else if (const auto* m = dynamic_cast<const ItemKnn*>(&model)) {
            w.vec_i64(m->neighbor_ptr_);
            w.u64(m->neighbors_.size());
            for (const auto& nb : m->neighbors_) {
                w.i32(nb.item);
                w.f64(nb.weight);
            }
        } else if (const auto* m = dynamic_cast<const Slim*>(&model)) {
            w.vec_i64(m->col_ptr_);
            w.u64(m->weights_.size());
            for (const auto& e : m->weights_) {
                w.i32(e.item);
                w.f64(e.weight);
            }
        } else if (const auto* m = dynamic_cast<const Als*>(&model)) {
            w.vec_f64(m->user_factors_);
            w.vec_f64(m->item_factors_);
        } else if (const auto* m = dynamic_cast<const AssociationRules*>(&model)) {
            w.vec_i64(m->rule_ptr_);
            w.u64(m->rules_.size());
            for (const auto& rule : m->rules_) {
                w.i32(rule.target);
                w.f64(rule.confidence);
                w.f64(rule.lift);
            }
        } else {
            raise(ErrorCode::BadModelFile, "model '" + model.name() + "' is not serializable");
        }
    }

    static void load_state(Reader& r, Recommender& model) {
        model.n_queries_ = r.i32();
        model.n_items_ = r.i32();
        model.history_ = read_matrix(r);

        if (auto* m = dynamic_cast<PopRec*>(&model)) {
            m->scores_ = r.vec_f64();
            m->ranking_ = ranked(m->scores_);
        } else if (auto* m = dynamic_cast<QueryPopRec*>(&model)) {
            m->shares_ = r.vec_f64();
        } else if (auto* m = dynamic_cast<WilsonRec*>(&model)) {
            m->scores_ = r.vec_f64();
            m->ranking_ = ranked(m->scores_);
        } else if (auto* m = dynamic_cast<UcbRec*>(&model)) {
            m->scores_ = r.vec_f64();
            m->ranking_ = ranked(m->scores_);
        } else if (auto* m = dynamic_cast<KlUcbRec*>(&model)) {
            m->scores_ = r.vec_f64();
            m->ranking_ = ranked(m->scores_);
        } else if (auto* m = dynamic_cast<ThompsonRec*>(&model)) {
            m->n_pos_ = r.vec_i64();
            m->n_fail_ = r.vec_i64();
        } else if (auto* m = dynamic_cast<ItemKnn*>(&model)) {
            m->neighbor_ptr_ = r.vec_i64();
            m->neighbors_.resize(r.u64());
            for (auto& nb : m->neighbors_) {
                nb.item = r.i32();
                nb.weight = r.f64();
            }
        } else if (auto* m = dynamic_cast<Slim*>(&model)) {
            m->col_ptr_ = r.vec_i64();
            m->weights_.resize(r.u64());
            for (auto& e : m->weights_) {
                e.item = r.i32();
                e.weight = r.f64();
            }
            m->build_row_index();
        } else if (auto* m = dynamic_cast<Als*>(&model)) {
            m->user_factors_ = r.vec_f64();
            m->item_factors_ = r.vec_f64();
        } else if (auto* m = dynamic_cast<AssociationRules*>(&model)) {
            m->rule_ptr_ = r.vec_i64();
            m->rules_.resize(r.u64());
            for (auto& rule : m->rules_) {
                rule.target = r.i32();
                rule.confidence = r.f64();
                rule.lift = r.f64();
            }
        } else {
            raise(ErrorCode::BadModelFile, "model '" + model.name() + "' is not loadable");
        }
        model.fitted_ = true;
    }

private:
    static std::vector<ScoredItem> ranked(const std::vector<double>& scores) {
        std::vector<ScoredItem> out(scores.size());
        for (std::size_t i = 0; i < scores.size(); ++i) {
            out[i] = {static_cast<std::int32_t>(i), scores[i]};
        }
        std::sort(out.begin(), out.end(), [](const ScoredItem& a, const ScoredItem& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.item < b.item;
        });
        return out;
    }
};

void save_model(const std::string& path, const Recommender& model,
                const EncoderMapping& mapping) {
    if (!model.is_fitted()) {
        raise(ErrorCode::UnfittedModel, "cannot save an unfitted model");
    }
    Writer w(path);
    w.bytes(kMagic, sizeof(kMagic));
    w.str(model.name());
    w.str(ModelArchive::params_json(model).dump());

    w.u64(mapping.columns.size());
    for (const auto& [name, column] : mapping.columns) {
        w.str(name);
        w.u64(column.inverse.size());
        for (const auto& token : column.inverse) w.str(token);
    }
    ModelArchive::save_state(w, model);
    if (!w.good()) raise(ErrorCode::IoError, "failed writing '" + path + "'");
}

LoadedModel load_model(const std::string& path) {
    Reader r(path);
    char magic[5];
    r.bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        raise(ErrorCode::BadModelFile, "'" + path + "' is not a recsmith model file");
    }
    const std::string kind = r.str();
    json params;
    try {
        params = json::parse(r.str());
    } catch (const json::exception&) {
        raise(ErrorCode::BadModelFile, "corrupt params block in '" + path + "'");
    }

    LoadedModel out;
    const std::uint64_t n_columns = r.u64();
    for (std::uint64_t c = 0; c < n_columns; ++c) {
        const std::string name = r.str();
        ColumnMapping column;
        const std::uint64_t n_tokens = r.u64();
        column.inverse.reserve(n_tokens);
        for (std::uint64_t t = 0; t < n_tokens; ++t) {
            column.insert_if_new(r.str());
        }
        if (column.inverse.size() != n_tokens) {
            raise(ErrorCode::BadModelFile, "duplicate tokens in encoder column '" + name + "'");
        }
        out.mapping.columns.emplace_back(name, std::move(column));
    }

    out.model = make_model(kind, params);
    ModelArchive::load_state(r, *out.model);
    return out;
}

}  // namespace recsmith
