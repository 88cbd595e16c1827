#include <sqlite3.h>

#include <condition_variable>
#include <functional>
#include <type_traits>
#include <json.hpp>
#include <map>
#include <mutex>

#include "fn/store.hpp"
#include "fn/util/time.hpp"
#include "fn/util/uuid.hpp"

namespace fn::catalog {
namespace {

[[noreturn]] void fail(sqlite3* db, const std::string& what) {
    throw CatalogError(ErrorKind::storage, what + ": " + (db ? sqlite3_errmsg(db) : "out of memory"));
}

class Connection {
public:
    explicit Connection(const std::filesystem::path& path) {
        const int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_NOMUTEX;
        if (sqlite3_open_v2(path.c_str(), &db_, flags, nullptr) != SQLITE_OK) {
            std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
            sqlite3_close(db_);
            db_ = nullptr;
            throw CatalogError(ErrorKind::storage, "cannot open store " + path.string() + ": " + msg);
        }
        sqlite3_busy_timeout(db_, 10000);
        exec("PRAGMA foreign_keys = ON");
    }
    ~Connection() { sqlite3_close_v2(db_); }
    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;

    sqlite3* get() const { return db_; }

    void exec(const char* sql) {
        char* err = nullptr;
        if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
            std::string msg = err ? err : "unknown error";
            sqlite3_free(err);
            throw CatalogError(ErrorKind::storage, std::string("sql failed (") + sql + "): " + msg);
        }
    }

private:
    sqlite3* db_ = nullptr;
};

class Stmt {
public:
    Stmt(Connection& conn, const std::string& sql) : db_(conn.get()) {
        if (sqlite3_prepare_v2(db_, sql.c_str(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK) {
            fail(db_, "prepare failed for: " + sql);
        }
    }
    ~Stmt() { sqlite3_finalize(stmt_); }
    Stmt(const Stmt&) = delete;
    Stmt& operator=(const Stmt&) = delete;

    Stmt& bind(int i, std::string_view v) {
        check(sqlite3_bind_text(stmt_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
        return *this;
    }
    Stmt& bind(int i, const std::string& v) { return bind(i, std::string_view(v)); }
    Stmt& bind(int i, const char* v) { return bind(i, std::string_view(v)); }
    Stmt& bind(int i, double v) {
        check(sqlite3_bind_double(stmt_, i, v));
        return *this;
    }
    Stmt& bind(int i, std::int64_t v) {
        check(sqlite3_bind_int64(stmt_, i, v));
        return *this;
    }
    Stmt& bind(int i, bool v) { return bind(i, static_cast<std::int64_t>(v ? 1 : 0)); }
    Stmt& bind_null(int i) {
        check(sqlite3_bind_null(stmt_, i));
        return *this;
    }
    template <typename T>
    Stmt& bind(int i, const std::optional<T>& v) {
        return v ? bind(i, *v) : bind_null(i);
    }

    /// True while rows remain.
    bool step() {
        const int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        if (rc == SQLITE_CONSTRAINT) {
            throw CatalogError(ErrorKind::conflict, std::string("constraint violated: ") + sqlite3_errmsg(db_));
        }
        fail(db_, "step failed");
    }
    void run() {
        while (step()) {
        }
    }
    void reset() {
        sqlite3_reset(stmt_);
        sqlite3_clear_bindings(stmt_);
    }

    bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
    std::string text(int col) const {
        const auto* p = sqlite3_column_text(stmt_, col);
        return p ? std::string(reinterpret_cast<const char*>(p), sqlite3_column_bytes(stmt_, col)) : std::string();
    }
    std::optional<std::string> opt_text(int col) const {
        return is_null(col) ? std::nullopt : std::optional<std::string>(text(col));
    }
    double real(int col) const { return sqlite3_column_double(stmt_, col); }
    std::optional<double> opt_real(int col) const {
        return is_null(col) ? std::nullopt : std::optional<double>(real(col));
    }
    std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
    std::optional<std::int64_t> opt_integer(int col) const {
        return is_null(col) ? std::nullopt : std::optional<std::int64_t>(integer(col));
    }
    std::optional<bool> opt_bool(int col) const {
        return is_null(col) ? std::nullopt : std::optional<bool>(integer(col) != 0);
    }
    int columns() const { return sqlite3_column_count(stmt_); }

private:
    void check(int rc) {
        if (rc != SQLITE_OK) fail(db_, "bind failed");
    }

    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

/// BEGIN/COMMIT with rollback on unwind.
class Transaction {
public:
    Transaction(Connection& conn, const char* begin = "BEGIN") : conn_(conn) { conn_.exec(begin); }
    ~Transaction() {
        if (!done_) sqlite3_exec(conn_.get(), "ROLLBACK", nullptr, nullptr, nullptr);
    }
    void commit() {
        conn_.exec("COMMIT");
        done_ = true;
    }

private:
    Connection& conn_;
    bool done_ = false;
};

// Column names come from the field tables; some (references) are SQL keywords.
std::string quoted(std::string_view key) { return "\"" + std::string(key) + "\""; }

std::string collection_columns() {
    std::string cols;
    for (const auto& f : kRequiredCollectionFields) {
        if (!cols.empty()) cols += ", ";
        cols += quoted(f.key);
    }
    for (const auto& f : kOptionalCollectionFields) {
        cols += ", ";
        cols += quoted(f.key);
    }
    return cols;
}

std::string schema_sql() {
    std::string coll = "CREATE TABLE IF NOT EXISTS collections (uuid TEXT PRIMARY KEY";
    for (const auto& f : kRequiredCollectionFields) {
        if (f.key == "uuid") continue;
        coll += ", " + quoted(f.key) + " TEXT NOT NULL";
    }
    for (const auto& f : kOptionalCollectionFields) coll += ", " + quoted(f.key) + " TEXT";
    coll += ", seq INTEGER NOT NULL);\n";

    return coll + R"SQL(
CREATE TABLE IF NOT EXISTS images (
  uuid TEXT PRIMARY KEY,
  collection_uuid TEXT NOT NULL REFERENCES collections(uuid),
  image_url TEXT NOT NULL,
  width_px INTEGER, height_px INTEGER,
  latitude REAL, longitude REAL, depth_m REAL,
  timestamp TEXT, ts_ms INTEGER,
  imaging_type TEXT, observer TEXT, altitude_m REAL,
  seq INTEGER NOT NULL,
  UNIQUE (collection_uuid, image_url));
CREATE INDEX IF NOT EXISTS images_order ON images (ts_ms, uuid);
CREATE TABLE IF NOT EXISTS localizations (
  uuid TEXT PRIMARY KEY,
  image_uuid TEXT NOT NULL REFERENCES images(uuid),
  concept TEXT NOT NULL, alt_concept TEXT,
  x REAL NOT NULL, y REAL NOT NULL, width REAL NOT NULL, height REAL NOT NULL,
  group_of INTEGER, occluded INTEGER, truncated INTEGER,
  observer TEXT,
  verification TEXT NOT NULL, verifier TEXT,
  seq INTEGER NOT NULL);
CREATE INDEX IF NOT EXISTS localizations_image ON localizations (image_uuid, seq);
CREATE INDEX IF NOT EXISTS localizations_concept ON localizations (concept);
CREATE TABLE IF NOT EXISTS audit (
  seq INTEGER PRIMARY KEY AUTOINCREMENT,
  localization_uuid TEXT NOT NULL REFERENCES localizations(uuid),
  from_state TEXT NOT NULL, to_state TEXT NOT NULL,
  verifier TEXT NOT NULL, at TEXT NOT NULL);
CREATE TABLE IF NOT EXISTS counters (name TEXT PRIMARY KEY, value INTEGER NOT NULL);
INSERT OR IGNORE INTO counters VALUES ('seq', 0);
)SQL";
}

constexpr const char* kImageColumns =
    "i.uuid, i.collection_uuid, i.image_url, i.width_px, i.height_px, i.latitude, i.longitude, i.depth_m, "
    "i.timestamp, i.imaging_type, i.observer, i.altitude_m";

constexpr const char* kLocalizationColumns =
    "l.uuid, l.image_uuid, l.concept, l.alt_concept, l.x, l.y, l.width, l.height, l.group_of, l.occluded, "
    "l.truncated, l.observer, l.verification, l.verifier";

ImageRecord read_image(const Stmt& s) {
    ImageRecord r;
    r.uuid = s.text(0);
    r.collection_uuid = s.text(1);
    r.image_url = s.text(2);
    r.width_px = s.opt_integer(3);
    r.height_px = s.opt_integer(4);
    r.latitude = s.opt_real(5);
    r.longitude = s.opt_real(6);
    r.depth_m = s.opt_real(7);
    r.timestamp = s.opt_text(8);
    r.imaging_type = s.opt_text(9);
    r.observer = s.opt_text(10);
    r.altitude_m = s.opt_real(11);
    return r;
}

Localization read_localization(const Stmt& s) {
    Localization l;
    l.uuid = s.text(0);
    l.image_uuid = s.text(1);
    l.concept_name = s.text(2);
    l.alt_concept = s.opt_text(3);
    l.bbox = {s.real(4), s.real(5), s.real(6), s.real(7)};
    l.group_of = s.opt_bool(8);
    l.occluded = s.opt_bool(9);
    l.truncated = s.opt_bool(10);
    l.observer = s.opt_text(11);
    l.verification = parse_verification(s.text(12)).value_or(Verification::unverified);
    l.verifier = s.opt_text(13);
    return l;
}

Collection read_collection(const Stmt& s) {
    Collection c;
    int col = 0;
    for (const auto& f : kRequiredCollectionFields) c.*f.member = s.text(col++);
    for (const auto& f : kOptionalCollectionFields) c.*f.member = s.opt_text(col++);
    return c;
}

/// WHERE clause and its positional bindings for a filter.
struct WhereClause {
    std::string sql;
    std::vector<std::function<void(Stmt&, int)>> binders;

    void add(std::string cond) {
        sql += sql.empty() ? " WHERE " : " AND ";
        sql += std::move(cond);
    }
    template <typename T>
    void arg(T value) {
        binders.push_back([v = std::move(value)](Stmt& s, int i) { s.bind(i, v); });
    }
    int bind_all(Stmt& s, int first = 1) const {
        int i = first;
        for (const auto& b : binders) b(s, i++);
        return i;
    }
};

std::string json_array(const std::vector<std::string>& values) { return nlohmann::json(values).dump(); }

std::string localization_conditions(const ResolvedFilter& f, WhereClause& w, std::string_view alias) {
    std::string cond;
    const std::string a(alias);
    if (f.concepts) {
        cond += " AND " + a + ".concept IN (SELECT value FROM json_each(?))";
        w.arg(json_array(*f.concepts));
    }
    if (f.state) {
        cond += " AND " + a + ".verification = ?";
        w.arg(std::string(verification_name(*f.state)));
    }
    return cond;
}

WhereClause image_where(const ResolvedFilter& f) {
    WhereClause w;
    if (f.geo) {
        w.add("i.latitude BETWEEN ? AND ? AND i.longitude BETWEEN ? AND ?");
        w.arg(f.geo->min_lat);
        w.arg(f.geo->max_lat);
        w.arg(f.geo->min_lon);
        w.arg(f.geo->max_lon);
    }
    if (f.depth) {
        w.add("i.depth_m BETWEEN ? AND ?");
        w.arg(f.depth->min_m);
        w.arg(f.depth->max_m);
    }
    if (f.imaging_type) {
        w.add("i.imaging_type = ? COLLATE NOCASE");
        w.arg(*f.imaging_type);
    }
    if (f.collection_uuid) {
        w.add("i.collection_uuid = ?");
        w.arg(*f.collection_uuid);
    }
    if (f.contributor) {
        w.add("i.collection_uuid IN (SELECT uuid FROM collections WHERE contributor_email = ? COLLATE NOCASE)");
        w.arg(*f.contributor);
    }
    if (f.filters_localizations()) {
        WhereClause inner;
        std::string cond = localization_conditions(f, inner, "l");
        w.add("EXISTS (SELECT 1 FROM localizations l WHERE l.image_uuid = i.uuid" + cond + ")");
        for (auto& b : inner.binders) w.binders.push_back(std::move(b));
    }
    return w;
}

class SqliteStore final : public CatalogStore {
public:
    SqliteStore(const std::filesystem::path& path, std::size_t readers) : path_(path) {
        writer_ = std::make_unique<Connection>(path);
        writer_->exec("PRAGMA journal_mode = WAL");
        writer_->exec("PRAGMA synchronous = NORMAL");
        {
            Transaction tx(*writer_, "BEGIN IMMEDIATE");
            writer_->exec(schema_sql().c_str());
            tx.commit();
        }
        for (std::size_t i = 0; i < std::max<std::size_t>(1, readers); ++i) {
            pool_.push_back(std::make_unique<Connection>(path));
        }
    }

    void write(const WriteBatch& batch) override {
        std::lock_guard lock(write_mu_);
        Transaction tx(*writer_, "BEGIN IMMEDIATE");
        std::int64_t seq = next_seq();

        if (batch.collection) {
            upsert_collection(*batch.collection, seq++);
        } else {
            Stmt s(*writer_, "SELECT 1 FROM collections WHERE uuid = ?");
            s.bind(1, batch.collection_uuid);
            if (!s.step()) throw CatalogError(ErrorKind::not_found, "unknown collection " + batch.collection_uuid);
        }

        Stmt exists(*writer_, "SELECT 1 FROM images WHERE collection_uuid = ? AND image_url = ?");
        Stmt img(*writer_,
                 "INSERT INTO images (uuid, collection_uuid, image_url, width_px, height_px, latitude, longitude, "
                 "depth_m, timestamp, ts_ms, imaging_type, observer, altitude_m, seq) "
                 "VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?)");
        Stmt loc(*writer_, kInsertLocalization);
        for (const auto& entry : batch.images) {
            const auto& r = entry.image;
            exists.reset();
            exists.bind(1, batch.collection_uuid).bind(2, r.image_url);
            if (exists.step()) {
                throw CatalogError(ErrorKind::conflict, "image URL already in collection: " + r.image_url,
                                   {{"image_url", "duplicate image URL " + r.image_url}});
            }
            std::optional<std::int64_t> ts_ms;
            if (r.timestamp) {
                if (auto ts = util::parse_iso8601(*r.timestamp)) ts_ms = ts->epoch_ms;
            }
            img.reset();
            img.bind(1, r.uuid)
                .bind(2, batch.collection_uuid)
                .bind(3, r.image_url)
                .bind(4, r.width_px)
                .bind(5, r.height_px)
                .bind(6, r.latitude)
                .bind(7, r.longitude)
                .bind(8, r.depth_m)
                .bind(9, r.timestamp)
                .bind(10, ts_ms)
                .bind(11, r.imaging_type)
                .bind(12, r.observer)
                .bind(13, r.altitude_m)
                .bind(14, seq++);
            img.run();
            for (const auto& l : entry.localizations) insert_localization(loc, l, r.uuid, seq++);
        }
        set_seq(seq);
        tx.commit();
    }

    void add_localizations(std::string_view image_uuid, const std::vector<Localization>& locs) override {
        std::lock_guard lock(write_mu_);
        Transaction tx(*writer_, "BEGIN IMMEDIATE");
        Stmt exists(*writer_, "SELECT 1 FROM images WHERE uuid = ?");
        exists.bind(1, image_uuid);
        if (!exists.step()) throw CatalogError(ErrorKind::not_found, "unknown image " + std::string(image_uuid));
        std::int64_t seq = next_seq();
        Stmt loc(*writer_, kInsertLocalization);
        for (const auto& l : locs) insert_localization(loc, l, image_uuid, seq++);
        set_seq(seq);
        tx.commit();
    }

    std::optional<ImageEntry> image(std::string_view uuid) override {
        return read([&](Connection& c) -> std::optional<ImageEntry> {
            Stmt s(c, std::string("SELECT ") + kImageColumns + " FROM images i WHERE i.uuid = ?");
            s.bind(1, uuid);
            if (!s.step()) return std::nullopt;
            std::vector<ImageEntry> items{ImageEntry{read_image(s), {}}};
            attach_localizations(c, ResolvedFilter{}, items);
            return std::move(items.front());
        });
    }

    std::optional<Collection> collection(std::string_view uuid) override {
        return read([&](Connection& c) -> std::optional<Collection> {
            Stmt s(c, "SELECT " + collection_columns() + " FROM collections WHERE uuid = ?");
            s.bind(1, uuid);
            if (!s.step()) return std::nullopt;
            return read_collection(s);
        });
    }

    std::vector<Collection> collections() override {
        return read([&](Connection& c) {
            std::vector<Collection> out;
            Stmt s(c, "SELECT " + collection_columns() + " FROM collections ORDER BY seq");
            while (s.step()) out.push_back(read_collection(s));
            return out;
        });
    }

    std::optional<Localization> localization(std::string_view uuid) override {
        return read([&](Connection& c) { return localization_on(c, uuid); });
    }

    Localization transition(std::string_view uuid, Verification to, std::string_view verifier,
                            std::string_view at) override {
        std::lock_guard lock(write_mu_);
        Transaction tx(*writer_, "BEGIN IMMEDIATE");
        auto current = localization_on(*writer_, uuid);
        if (!current) throw CatalogError(ErrorKind::not_found, "unknown localization " + std::string(uuid));
        if (!transition_allowed(current->verification, to)) {
            throw CatalogError(ErrorKind::illegal_transition,
                               "illegal verification transition " +
                                   std::string(verification_name(current->verification)) + " -> " +
                                   std::string(verification_name(to)),
                               {{"state", "cannot move from " + std::string(verification_name(current->verification)) +
                                              " to " + std::string(verification_name(to))}});
        }
        Stmt up(*writer_, "UPDATE localizations SET verification = ?, verifier = ? WHERE uuid = ?");
        up.bind(1, std::string(verification_name(to))).bind(2, verifier).bind(3, uuid);
        up.run();
        Stmt audit(*writer_,
                   "INSERT INTO audit (localization_uuid, from_state, to_state, verifier, at) VALUES (?,?,?,?,?)");
        audit.bind(1, uuid)
            .bind(2, std::string(verification_name(current->verification)))
            .bind(3, std::string(verification_name(to)))
            .bind(4, verifier)
            .bind(5, at);
        audit.run();
        tx.commit();
        current->verification = to;
        current->verifier = std::string(verifier);
        return *current;
    }

    std::vector<AuditEntry> audit_log(std::optional<std::string_view> uuid) override {
        return read([&](Connection& c) {
            std::vector<AuditEntry> out;
            Stmt s(c, uuid ? "SELECT seq, localization_uuid, from_state, to_state, verifier, at FROM audit "
                             "WHERE localization_uuid = ? ORDER BY seq"
                           : "SELECT seq, localization_uuid, from_state, to_state, verifier, at FROM audit ORDER BY seq");
            if (uuid) s.bind(1, *uuid);
            while (s.step()) {
                out.push_back(AuditEntry{s.integer(0), s.text(1),
                                         parse_verification(s.text(2)).value_or(Verification::unverified),
                                         parse_verification(s.text(3)).value_or(Verification::unverified), s.text(4),
                                         s.text(5)});
            }
            return out;
        });
    }

    QueryPage query(const ResolvedFilter& f) override {
        return read([&](Connection& c) {
            QueryPage page;
            page.page = f.page;
            page.page_size = f.page_size;
            const WhereClause w = image_where(f);
            {
                Stmt s(c, "SELECT COUNT(*) FROM images i" + w.sql);
                w.bind_all(s);
                s.step();
                page.total = s.integer(0);
            }
            Stmt s(c, std::string("SELECT ") + kImageColumns + " FROM images i" + w.sql +
                          " ORDER BY i.ts_ms, i.uuid LIMIT ? OFFSET ?");
            int next = w.bind_all(s);
            s.bind(next, f.page_size).bind(next + 1, (f.page - 1) * f.page_size);
            while (s.step()) page.items.push_back(ImageEntry{read_image(s), {}});
            attach_localizations(c, f, page.items);
            return page;
        });
    }

    std::vector<ImageEntry> select(const ResolvedFilter& f) override {
        return read([&](Connection& c) {
            std::vector<ImageEntry> out;
            const WhereClause w = image_where(f);
            Stmt s(c, std::string("SELECT ") + kImageColumns + " FROM images i" + w.sql + " ORDER BY i.ts_ms, i.uuid");
            w.bind_all(s);
            while (s.step()) out.push_back(ImageEntry{read_image(s), {}});
            attach_localizations(c, f, out);
            return out;
        });
    }

    StoreCounts counts() override {
        return read([&](Connection& c) {
            StoreCounts out;
            const auto count = [&](const char* sql) {
                Stmt s(c, sql);
                s.step();
                return s.integer(0);
            };
            out.collections = count("SELECT COUNT(*) FROM collections");
            out.images = count("SELECT COUNT(*) FROM images");
            out.localizations = count("SELECT COUNT(*) FROM localizations");
            out.audit_entries = count("SELECT COUNT(*) FROM audit");
            return out;
        });
    }

    std::uint64_t digest() override {
        return read([&](Connection& c) {
            std::uint64_t h = util::fnv1a("");
            for (const char* sql : {"SELECT * FROM collections ORDER BY uuid", "SELECT * FROM images ORDER BY uuid",
                                    "SELECT * FROM localizations ORDER BY uuid", "SELECT * FROM audit ORDER BY seq"}) {
                Stmt s(c, sql);
                while (s.step()) {
                    for (int col = 0; col < s.columns(); ++col) {
                        h = util::fnv1a(s.is_null(col) ? std::string("\x01") : s.text(col), h);
                        h = util::fnv1a("\x1f", h);
                    }
                    h = util::fnv1a("\x1e", h);
                }
                h = util::fnv1a("\x1d", h);
            }
            return h;
        });
    }

    std::int64_t integrity_violations() override {
        return read([&](Connection& c) {
            Stmt s(c,
                   "SELECT (SELECT COUNT(*) FROM localizations l WHERE NOT EXISTS "
                   "(SELECT 1 FROM images i WHERE i.uuid = l.image_uuid)) + "
                   "(SELECT COUNT(*) FROM images i WHERE NOT EXISTS "
                   "(SELECT 1 FROM collections c WHERE c.uuid = i.collection_uuid))");
            s.step();
            return s.integer(0);
        });
    }

private:
    static constexpr const char* kInsertLocalization =
        "INSERT INTO localizations (uuid, image_uuid, concept, alt_concept, x, y, width, height, group_of, "
        "occluded, truncated, observer, verification, verifier, seq) VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?,?)";

    static void insert_localization(Stmt& loc, const Localization& l, std::string_view image_uuid, std::int64_t seq) {
        loc.reset();
        loc.bind(1, l.uuid)
            .bind(2, image_uuid)
            .bind(3, l.concept_name)
            .bind(4, l.alt_concept)
            .bind(5, l.bbox.x)
            .bind(6, l.bbox.y)
            .bind(7, l.bbox.width)
            .bind(8, l.bbox.height)
            .bind(9, l.group_of)
            .bind(10, l.occluded)
            .bind(11, l.truncated)
            .bind(12, l.observer)
            .bind(13, std::string(verification_name(l.verification)))
            .bind(14, l.verifier)
            .bind(15, seq);
        loc.run();
    }

    template <typename Fn>
    std::invoke_result_t<Fn&, Connection&> read(Fn&& fn) {
        Connection* conn = nullptr;
        {
            std::unique_lock lock(pool_mu_);
            pool_cv_.wait(lock, [&] { return !pool_.empty(); });
            conn = pool_.back().release();
            pool_.pop_back();
        }
        std::unique_ptr<Connection> owned(conn);
        struct Return {
            SqliteStore* self;
            std::unique_ptr<Connection>& c;
            ~Return() {
                std::lock_guard lock(self->pool_mu_);
                self->pool_.push_back(std::move(c));
                self->pool_cv_.notify_one();
            }
        } give_back{this, owned};
        Transaction tx(*owned);
        auto result = fn(*owned);
        tx.commit();
        return result;
    }

    std::optional<Localization> localization_on(Connection& c, std::string_view uuid) {
        Stmt s(c, std::string("SELECT ") + kLocalizationColumns + " FROM localizations l WHERE l.uuid = ?");
        s.bind(1, uuid);
        if (!s.step()) return std::nullopt;
        return read_localization(s);
    }

    void attach_localizations(Connection& c, const ResolvedFilter& f, std::vector<ImageEntry>& items) {
        if (items.empty()) return;
        std::vector<std::string> ids;
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < items.size(); ++i) {
            ids.push_back(items[i].image.uuid);
            index[items[i].image.uuid] = i;
        }
        WhereClause w;
        w.arg(json_array(ids));
        const std::string cond = localization_conditions(f, w, "l");
        Stmt s(c, std::string("SELECT ") + kLocalizationColumns +
                      " FROM localizations l WHERE l.image_uuid IN (SELECT value FROM json_each(?))" + cond +
                      " ORDER BY l.seq");
        w.bind_all(s);
        while (s.step()) {
            auto l = read_localization(s);
            items[index.at(l.image_uuid)].localizations.push_back(std::move(l));
        }
    }

    void upsert_collection(const Collection& col, std::int64_t seq) {
        std::string cols = collection_columns();
        std::string placeholders, updates;
        std::size_t n = kRequiredCollectionFields.size() + kOptionalCollectionFields.size();
        for (std::size_t i = 0; i < n; ++i) placeholders += i ? ",?" : "?";
        for (const auto& f : kRequiredCollectionFields) {
            if (f.key == "uuid") continue;
            if (!updates.empty()) updates += ", ";
            updates += quoted(f.key) + " = excluded." + quoted(f.key);
        }
        for (const auto& f : kOptionalCollectionFields) {
            updates += ", " + quoted(f.key) + " = excluded." + quoted(f.key);
        }
        Stmt s(*writer_, "INSERT INTO collections (" + cols + ", seq) VALUES (" + placeholders +
                             ", ?) ON CONFLICT(uuid) DO UPDATE SET " + updates);
        int i = 1;
        for (const auto& f : kRequiredCollectionFields) s.bind(i++, col.*f.member);
        for (const auto& f : kOptionalCollectionFields) s.bind(i++, col.*f.member);
        s.bind(i, seq);
        s.run();
    }

    std::int64_t next_seq() {
        Stmt s(*writer_, "SELECT value FROM counters WHERE name = 'seq'");
        s.step();
        return s.integer(0) + 1;
    }

    void set_seq(std::int64_t v) {
        Stmt s(*writer_, "UPDATE counters SET value = MAX(value, ?) WHERE name = 'seq'");
        s.bind(1, v);
        s.run();
    }

    std::filesystem::path path_;
    std::mutex write_mu_;
    std::unique_ptr<Connection> writer_;
    std::mutex pool_mu_;
    std::condition_variable pool_cv_;
    std::vector<std::unique_ptr<Connection>> pool_;
};

}  // namespace

std::unique_ptr<CatalogStore> open_sqlite_store(const std::filesystem::path& path, std::size_t readers) {
    return std::make_unique<SqliteStore>(path, readers);
}

}  // namespace fn::catalog
