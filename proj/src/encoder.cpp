#include "recsmith/encoder.hpp"

#include "recsmith/error.hpp"

namespace recsmith {

const ColumnMapping* EncoderMapping::find(const std::string& column) const {
    for (const auto& [name, mapping] : columns) {
        if (name == column) return &mapping;
    }
    return nullptr;
}

const ColumnMapping& EncoderMapping::at(const std::string& column) const {
    const ColumnMapping* m = find(column);
    if (!m) raise(ErrorCode::UnknownColumn, "no mapping fitted for column '" + column + "'");
    return *m;
}

ColumnMapping fit_column_mapping(const std::vector<std::string>& tokens) {
    ColumnMapping mapping;
    for (const auto& token : tokens) mapping.insert_if_new(token);
    return mapping;
}

EncoderMapping fit_encoder(const Dataset& dataset, const std::vector<std::string>& columns) {
    EncoderMapping out;
    for (const auto& name : columns) {
        const ColumnSpec* spec = dataset.schema().find(name);
        if (!spec) raise(ErrorCode::UnknownColumn, "column '" + name + "' not in schema");
        if (spec->feature_type != FeatureType::Categorical) {
            raise(ErrorCode::NonCategoricalColumn,
                  "column '" + name + "' is numerical and cannot be label-encoded");
        }

        ColumnMapping mapping;
        if (spec->hint == FeatureHint::QueryId) {
            for (const auto& t : dataset.interactions().queries) mapping.insert_if_new(t);
            if (dataset.user_features()) {
                for (const auto& t : dataset.user_features()->keys) mapping.insert_if_new(t);
            }
        } else if (spec->hint == FeatureHint::ItemId) {
            for (const auto& t : dataset.interactions().items) mapping.insert_if_new(t);
            if (dataset.item_features()) {
                for (const auto& t : dataset.item_features()->keys) mapping.insert_if_new(t);
            }
        } else {
            const auto& table = spec->source == ColumnSource::UserFeatures
                                    ? dataset.user_features()
                                    : dataset.item_features();
            const FeatureTable::Column* col = table ? table->find(name) : nullptr;
            if (!col) raise(ErrorCode::UnknownColumn, "column '" + name + "' has no data");
            for (const auto& t : col->categorical) mapping.insert_if_new(t);
        }
        out.columns.emplace_back(name, std::move(mapping));
    }
    return out;
}

EncoderMapping fit_id_encoder(const Dataset& dataset) {
    return fit_encoder(dataset,
                       {dataset.schema().query_column(), dataset.schema().item_column()});
}

EncodedLog encode(const EncoderMapping& mapping, const InteractionLog& log, UnseenPolicy policy,
                  const std::string& query_column, const std::string& item_column) {
    const ColumnMapping& queries = mapping.at(query_column);
    const ColumnMapping& items = mapping.at(item_column);

    EncodedLog out;
    out.reserve(log.size());
    for (std::size_t r = 0; r < log.size(); ++r) {
        const std::int32_t q = queries.lookup(log.queries[r]);
        const std::int32_t i = items.lookup(log.items[r]);
        if (q < 0 || i < 0) {
            if (policy == UnseenPolicy::Drop) continue;
            const std::string& column = q < 0 ? query_column : item_column;
            const std::string& token = q < 0 ? log.queries[r] : log.items[r];
            raise(ErrorCode::UnseenToken,
                  "unseen token '" + token + "' in column '" + column + "'");
        }
        out.push_back(q, i, log.timestamps[r], log.ratings[r]);
    }
    return out;
}

RawRecommendations decode(const EncoderMapping& mapping, const EncodedRecommendations& recs,
                          const std::string& query_column, const std::string& item_column) {
    const ColumnMapping& queries = mapping.at(query_column);
    const ColumnMapping& items = mapping.at(item_column);

    auto token_of = [](const ColumnMapping& m, std::int32_t id, const std::string& column) {
        if (id < 0 || id >= m.size()) {
            raise(ErrorCode::IndexOutOfRange, "index " + std::to_string(id) +
                                                  " out of range for column '" + column +
                                                  "' of size " + std::to_string(m.size()));
        }
        return m.inverse[static_cast<std::size_t>(id)];
    };

    RawRecommendations out;
    out.k = recs.k;
    out.queries.reserve(recs.queries.size());
    out.entries.reserve(recs.entries.size());
    for (std::size_t g = 0; g < recs.queries.size(); ++g) {
        out.queries.push_back(token_of(queries, recs.queries[g], query_column));
        std::vector<RawRecommendations::Entry> list;
        list.reserve(recs.entries[g].size());
        for (const auto& entry : recs.entries[g]) {
            list.push_back({token_of(items, entry.item, item_column), entry.score});
        }
        out.entries.push_back(std::move(list));
    }
    return out;
}

}  // namespace recsmith
