#include "fn/taxonomy.hpp"

#include <atomic>
#include <deque>
#include <fstream>
#include <sstream>

#include "fn/taxonomy_provider.hpp"
#include "fn/util/strings.hpp"

namespace fn::taxonomy {
namespace {

constexpr std::string_view kRankNames[] = {"kingdom", "phylum", "class",   "order",
                                           "family",  "genus",  "species", "unranked"};

std::uint64_t next_identity() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}

}  // namespace

std::string_view rank_name(Rank r) { return kRankNames[static_cast<std::size_t>(r)]; }

std::optional<Rank> parse_rank(std::string_view s) {
    const std::string lower = util::to_lower(util::trim(s));
    if (lower.empty()) return Rank::unranked;
    for (std::size_t i = 0; i < std::size(kRankNames); ++i) {
        if (lower == kRankNames[i]) return static_cast<Rank>(i);
    }
    return std::nullopt;
}

std::string_view error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::parse: return "parse";
        case ErrorKind::empty: return "empty";
        case ErrorKind::cycle: return "cycle";
        case ErrorKind::duplicate_name: return "duplicate_name";
        case ErrorKind::multiple_roots: return "multiple_roots";
        case ErrorKind::unknown_parent: return "unknown_parent";
        case ErrorKind::rank_inversion: return "rank_inversion";
        case ErrorKind::not_found: return "not_found";
        case ErrorKind::no_rank: return "no_rank";
        case ErrorKind::configuration: return "configuration";
        case ErrorKind::provider: return "provider";
    }
    return "unknown";
}

ConceptTree ConceptTree::build(std::vector<TaxonRecord> records) {
    if (records.empty()) throw TaxonomyError(ErrorKind::empty, "", "taxonomy has no nodes");

    ConceptTree tree;
    tree.identity_ = next_identity();
    tree.nodes_.reserve(records.size());
    tree.children_.resize(records.size());

    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& rec = records[i];
        rec.name = std::string(util::trim(rec.name));
        if (rec.name.empty()) {
            throw TaxonomyError(ErrorKind::parse, "", "node " + std::to_string(i + 1) + " has an empty name");
        }
        const NodeId id{static_cast<std::uint32_t>(i)};
        const auto claim = [&](const std::string& key) {
            auto [it, inserted] = tree.index_.emplace(util::to_lower(key), id);
            if (!inserted) {
                throw TaxonomyError(ErrorKind::duplicate_name, rec.name,
                                    "duplicate name or alias '" + key + "' on node '" + rec.name + "'");
            }
        };
        claim(rec.name);
        for (const auto& alias : rec.aliases) claim(alias);
        tree.nodes_.push_back(TaxonomyNode{rec.name, rec.rank, std::nullopt, rec.aliases});
    }

    std::vector<NodeId> roots;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& parent = records[i].parent;
        if (!parent || util::trim(*parent).empty()) {
            roots.push_back(NodeId{static_cast<std::uint32_t>(i)});
            continue;
        }
        auto it = tree.index_.find(util::to_lower(util::trim(*parent)));
        if (it == tree.index_.end()) {
            throw TaxonomyError(ErrorKind::unknown_parent, records[i].name,
                                "node '" + records[i].name + "' names unknown parent '" + *parent + "'");
        }
        tree.nodes_[i].parent = it->second;
        tree.children_[it->second.value].push_back(NodeId{static_cast<std::uint32_t>(i)});
    }

    if (roots.size() > 1) {
        throw TaxonomyError(ErrorKind::multiple_roots, tree.nodes_[roots[1].value].name,
                            "multiple roots: '" + tree.nodes_[roots[0].value].name + "' and '" +
                                tree.nodes_[roots[1].value].name + "'");
    }

    // Every node reachable from the single root, or a parent chain loops.
    std::vector<bool> reached(tree.nodes_.size(), false);
    if (!roots.empty()) {
        tree.root_ = roots.front();
        std::vector<NodeId> stack{tree.root_};
        while (!stack.empty()) {
            NodeId n = stack.back();
            stack.pop_back();
            reached[n.value] = true;
            for (NodeId c : tree.children_[n.value]) stack.push_back(c);
        }
    }
    for (std::size_t i = 0; i < reached.size(); ++i) {
        if (reached[i]) continue;
        // Walk parents until a repeat; the repeated node lies on the cycle.
        std::vector<bool> seen(tree.nodes_.size(), false);
        std::uint32_t cur = static_cast<std::uint32_t>(i);
        while (!seen[cur]) {
            seen[cur] = true;
            cur = tree.nodes_[cur].parent->value;
        }
        throw TaxonomyError(ErrorKind::cycle, tree.nodes_[cur].name,
                            "parent links form a cycle through '" + tree.nodes_[cur].name + "'");
    }

    for (const auto& node : tree.nodes_) {
        if (!is_ranked(node.rank)) continue;
        for (auto p = node.parent; p; p = tree.nodes_[p->value].parent) {
            const auto& anc = tree.nodes_[p->value];
            if (!is_ranked(anc.rank)) continue;
            if (!coarser(anc.rank, node.rank)) {
                throw TaxonomyError(ErrorKind::rank_inversion, node.name,
                                    "node '" + node.name + "' (" + std::string(rank_name(node.rank)) +
                                        ") is not finer than ancestor '" + anc.name + "' (" +
                                        std::string(rank_name(anc.rank)) + ")");
            }
            break;
        }
    }
    return tree;
}

std::optional<NodeId> ConceptTree::find(std::string_view name) const {
    auto it = index_.find(util::to_lower(util::trim(name)));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

NodeId ConceptTree::resolve(std::string_view name) const {
    if (auto id = find(name)) return *id;
    throw TaxonomyError(ErrorKind::not_found, std::string(name), "concept not found: '" + std::string(name) + "'");
}

std::vector<NodeId> ConceptTree::descendants(NodeId id) const {
    std::vector<NodeId> out;
    std::vector<NodeId> stack{id};
    while (!stack.empty()) {
        NodeId n = stack.back();
        stack.pop_back();
        out.push_back(n);
        const auto& kids = children_.at(n.value);
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    return out;
}

bool ConceptTree::is_ancestor_or_self(NodeId ancestor, NodeId node) const {
    for (std::optional<NodeId> cur = node; cur; cur = nodes_[cur->value].parent) {
        if (*cur == ancestor) return true;
    }
    return false;
}

std::string ConceptTree::rank_label(NodeId node, Rank target) const {
    if (!is_ranked(target)) {
        throw TaxonomyError(ErrorKind::configuration, std::string(rank_name(target)),
                            "rank_label target must be a biological rank");
    }
    if (node == root_) return nodes_[node.value].name;

    // Ranks coarsen monotonically going up, so the first ranked node at or
    // above `target` is either the exact rank or the nearest coarser one.
    std::optional<NodeId> coarsest_ranked;
    for (std::optional<NodeId> cur = node; cur; cur = nodes_[cur->value].parent) {
        const auto& n = nodes_[cur->value];
        if (!is_ranked(n.rank)) continue;
        if (n.rank <= target) return n.name;
        coarsest_ranked = cur;
    }
    if (coarsest_ranked) return nodes_[coarsest_ranked->value].name;
    throw TaxonomyError(ErrorKind::no_rank, nodes_[node.value].name,
                        "node '" + nodes_[node.value].name + "' has no ranked ancestor");
}

std::vector<TaxonRecord> ConceptTree::records() const {
    std::vector<TaxonRecord> out;
    out.reserve(nodes_.size());
    for (const auto& n : nodes_) {
        out.push_back(TaxonRecord{n.name, n.rank,
                                  n.parent ? std::optional<std::string>(nodes_[n.parent->value].name) : std::nullopt,
                                  n.aliases});
    }
    return out;
}

std::vector<TaxonRecord> parse_taxonomy_text(std::string_view text) {
    std::vector<TaxonRecord> records;
    std::size_t line_no = 0;
    for (const auto& raw : util::split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (util::trim(line).empty() || util::trim(line).front() == '#') continue;

        auto cols = util::split(line, '\t');
        if (cols.size() > 4) {
            throw TaxonomyError(ErrorKind::parse, cols[0],
                                "line " + std::to_string(line_no) + ": expected at most 4 tab-separated columns");
        }
        cols.resize(4);
        TaxonRecord rec;
        rec.name = std::string(util::trim(cols[0]));
        auto rank = parse_rank(cols[1]);
        if (!rank) {
            throw TaxonomyError(ErrorKind::parse, rec.name,
                                "line " + std::to_string(line_no) + ": unknown rank '" + cols[1] + "'");
        }
        rec.rank = *rank;
        if (auto p = util::trim(cols[2]); !p.empty()) rec.parent = std::string(p);
        if (!util::trim(cols[3]).empty()) {
            for (const auto& a : util::split(cols[3], '|')) {
                if (auto t = util::trim(a); !t.empty()) rec.aliases.emplace_back(t);
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::string format_taxonomy_text(const std::vector<TaxonRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.name;
        out += '\t';
        out += rank_name(r.rank);
        out += '\t';
        out += r.parent.value_or("");
        out += '\t';
        for (std::size_t i = 0; i < r.aliases.size(); ++i) {
            if (i) out += '|';
            out += r.aliases[i];
        }
        out += '\n';
    }
    return out;
}

ConceptTree load_taxonomy_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TaxonomyError(ErrorKind::parse, "", "cannot open taxonomy file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ConceptTree::build(parse_taxonomy_text(ss.str()));
}

ConceptTree load_taxonomy(TaxonomyProvider& provider, std::string_view root_name) {
    auto root = provider.lookup(root_name);
    if (!root) {
        throw TaxonomyError(ErrorKind::not_found, std::string(root_name),
                            "provider has no node '" + std::string(root_name) + "'");
    }
    std::vector<TaxonRecord> records;
    std::deque<TaxonRecord> queue{*root};
    queue.front().parent.reset();
    std::unordered_map<std::string, bool> visited;
    while (!queue.empty()) {
        TaxonRecord rec = std::move(queue.front());
        queue.pop_front();
        if (!visited.emplace(util::to_lower(rec.name), true).second) {
            throw TaxonomyError(ErrorKind::cycle, rec.name, "provider returned '" + rec.name + "' twice");
        }
        for (auto& child : provider.children(rec.name)) queue.push_back(std::move(child));
        records.push_back(std::move(rec));
    }
    return ConceptTree::build(std::move(records));
}

SupercategoryMap SupercategoryMap::parse(std::string_view text) {
    std::vector<Entry> entries;
    for (const auto& raw : util::split(text, '\n')) {
        auto line = util::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto cols = util::split(line, '\t');
        if (cols.size() != 2) {
            throw TaxonomyError(ErrorKind::configuration, std::string(line),
                                "supercategory line must be label<TAB>root|root…");
        }
        Entry e{std::string(util::trim(cols[0])), {}};
        for (const auto& r : util::split(cols[1], '|')) {
            if (auto t = util::trim(r); !t.empty()) e.roots.emplace_back(t);
        }
        entries.push_back(std::move(e));
    }
    return SupercategoryMap(std::move(entries));
}

void SupercategoryMap::validate(const ConceptTree& tree) {
    validated_identity_.reset();
    std::vector<std::pair<NodeId, std::size_t>> resolved;
    for (std::size_t e = 0; e < entries_.size(); ++e) {
        for (const auto& root : entries_[e].roots) {
            auto id = tree.find(root);
            if (!id) {
                throw TaxonomyError(ErrorKind::configuration, root,
                                    "supercategory '" + entries_[e].label + "' names unknown root '" + root + "'");
            }
            resolved.emplace_back(*id, e);
        }
    }
    for (std::size_t i = 0; i < resolved.size(); ++i) {
        for (std::size_t j = 0; j < resolved.size(); ++j) {
            if (i == j || resolved[i].second == resolved[j].second) continue;
            if (tree.is_ancestor_or_self(resolved[i].first, resolved[j].first)) {
                throw TaxonomyError(ErrorKind::configuration, tree.name(resolved[j].first),
                                    "node '" + tree.name(resolved[j].first) + "' belongs to both '" +
                                        entries_[resolved[i].second].label + "' and '" +
                                        entries_[resolved[j].second].label + "'");
            }
        }
    }
    resolved_roots_ = std::move(resolved);
    validated_identity_ = tree.identity();
}

std::optional<std::string> SupercategoryMap::supercategory_of(const ConceptTree& tree, NodeId node) const {
    if (!validated_for(tree)) {
        throw TaxonomyError(ErrorKind::configuration, "", "supercategory map not validated against this tree");
    }
    for (std::optional<NodeId> cur = node; cur; cur = tree.parent(*cur)) {
        for (const auto& [root, entry] : resolved_roots_) {
            if (root == *cur) return entries_[entry].label;
        }
    }
    return std::nullopt;
}

}  // namespace fn::taxonomy
