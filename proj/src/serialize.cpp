#include "hyperembed/serialize.hpp"

#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hyperembed {

namespace {

void write_header(std::ostringstream& os, const Complex& H) {
    const auto& R = H.R();
    os << "hyperembed-complex v1\n";
    os << "base " << R.base_size() << " max " << R.max_size() << " copies "
       << R.copy_count() << "\n";
    for (int c = 0; c < R.copy_count(); ++c) {
        os << "copy " << c << " :";
        for (int b : R.copy(c).base) os << ' ' << b;
        os << "\n";
    }
    for (int c = 0; c < R.copy_count(); ++c) {
        os << "sub " << c << " :";
        for (int p = 0; p < (1 << R.size(c)); ++p) os << ' ' << R.subcopy(c, p);
        os << "\n";
    }
    for (int s : R.singleton_copies())
        os << "ground " << s << ' ' << H.ground().size(s) << "\n";
}

void write_parts(std::ostringstream& os, const Complex& H, const char* def_kw,
                 const char* undef_kw) {
    for (int c = 0; c < H.R().copy_count(); ++c) {
        if (!H.defined(c)) {
            os << undef_kw << ' ' << c << "\n";
            continue;
        }
        os << def_kw << ' ' << c << ' ' << H.count(c) << "\n";
        for_each_tuple(H.part(c), H.shape(c), [&](long long, const std::vector<int>& coords) {
            os << "t";
            for (int o : coords) os << ' ' << o;
            os << "\n";
        });
    }
}

void write_marks(std::ostringstream& os, const MarkedComplex& GM) {
    const Complex& H = GM.complex;
    for (int c = 0; c < H.R().copy_count(); ++c) {
        if (!GM.marked_defined(c)) continue;
        os << "marks " << c << ' ' << GM.marks[c]->count() << "\n";
        for_each_tuple(*GM.marks[c], H.shape(c), [&](long long, const std::vector<int>& coords) {
            os << "m";
            for (int o : coords) os << ' ' << o;
            os << "\n";
        });
    }
}

struct Reader {
    std::istringstream in;
    std::string line;
    explicit Reader(const std::string& s) : in(s) {}
    bool next() { return static_cast<bool>(std::getline(in, line)); }
    [[noreturn]] void fail(const std::string& what) {
        throw std::invalid_argument("parse error: " + what + " at line: " + line);
    }
};

std::vector<long long> ints_after(const std::string& line, size_t skip_tokens,
                                  Reader& rd) {
    std::istringstream ls(line);
    std::string tok;
    for (size_t i = 0; i < skip_tokens; ++i)
        if (!(ls >> tok)) rd.fail("missing token");
    std::vector<long long> out;
    long long v;
    while (ls >> tok) {
        if (tok == ":") continue;
        try {
            v = std::stoll(tok);
        } catch (...) {
            rd.fail("expected integer");
        }
        out.push_back(v);
    }
    return out;
}

Complex parse_complex(Reader& rd, bool* has_marks, MarkedComplex* gm) {
    if (!rd.next() || rd.line != "hyperembed-complex v1") rd.fail("bad magic");
    if (!rd.next()) rd.fail("missing size line");
    int r, k, nc;
    {
        std::istringstream ls(rd.line);
        std::string w1, w2, w3;
        if (!(ls >> w1 >> r >> w2 >> k >> w3 >> nc) || w1 != "base" || w2 != "max" ||
            w3 != "copies")
            rd.fail("bad size line");
    }
    std::vector<IndexComplex::Copy> copies(nc);
    for (int c = 0; c < nc; ++c) {
        if (!rd.next()) rd.fail("missing copy line");
        auto v = ints_after(rd.line, 2, rd);
        copies[c].base.assign(v.begin(), v.end());
    }
    std::vector<std::vector<int>> sub(nc);
    for (int c = 0; c < nc; ++c) {
        if (!rd.next()) rd.fail("missing sub line");
        auto v = ints_after(rd.line, 2, rd);
        sub[c].assign(v.begin(), v.end());
    }
    auto R = std::make_shared<IndexComplex>(IndexComplex::multi(copies, sub));
    std::vector<int> sizes(nc, -1);
    for (size_t i = 0; i < R->singleton_copies().size(); ++i) {
        if (!rd.next()) rd.fail("missing ground line");
        auto v = ints_after(rd.line, 1, rd);
        if (v.size() != 2) rd.fail("bad ground line");
        sizes[static_cast<int>(v[0])] = static_cast<int>(v[1]);
    }
    auto ground = std::make_shared<Ground>(*R, sizes);
    Complex H(R, ground);

    auto read_tuples = [&](int c, long long count, Bitset& bits, char tag) {
        const auto& sh = H.shape(c);
        std::vector<int> coords(sh.dims.size());
        for (long long t = 0; t < count; ++t) {
            if (!rd.next()) rd.fail("missing tuple line");
            auto v = ints_after(rd.line, 1, rd);
            if (rd.line.empty() || rd.line[0] != tag || v.size() != sh.dims.size())
                rd.fail("bad tuple line");
            for (size_t p = 0; p < v.size(); ++p) {
                if (v[p] < 0 || v[p] >= sh.dims[p]) rd.fail("ordinal out of range");
                coords[p] = static_cast<int>(v[p]);
            }
            bits.set(sh.rank(coords));
        }
    };

    if (has_marks) *has_marks = false;
    while (rd.next()) {
        if (rd.line == "end") break;
        std::istringstream ls(rd.line);
        std::string kw;
        ls >> kw;
        if (kw == "defined") {
            long long c, count;
            if (!(ls >> c >> count)) rd.fail("bad defined line");
            H.define(static_cast<int>(c));
            read_tuples(static_cast<int>(c), count, H.mutable_part(static_cast<int>(c)), 't');
        } else if (kw == "undefined") {
            long long c;
            if (!(ls >> c)) rd.fail("bad undefined line");
            H.undefine(static_cast<int>(c));
        } else if (kw == "marks" && gm) {
            long long c, count;
            if (!(ls >> c >> count)) rd.fail("bad marks line");
            if (has_marks) *has_marks = true;
            gm->marks.resize(nc);
            gm->marks[static_cast<size_t>(c)].emplace(H.shape(static_cast<int>(c)).total);
            read_tuples(static_cast<int>(c), count, *gm->marks[static_cast<size_t>(c)], 'm');
        } else {
            rd.fail("unknown keyword");
        }
    }
    return H;
}

} // namespace

std::string to_text(const Complex& H) {
    std::ostringstream os;
    write_header(os, H);
    write_parts(os, H, "defined", "undefined");
    os << "end\n";
    return os.str();
}

std::string to_text(const MarkedComplex& GM) {
    std::ostringstream os;
    write_header(os, GM.complex);
    write_parts(os, GM.complex, "defined", "undefined");
    write_marks(os, GM);
    os << "end\n";
    return os.str();
}

Complex complex_from_text(const std::string& text) {
    Reader rd(text);
    return parse_complex(rd, nullptr, nullptr);
}

MarkedComplex marked_from_text(const std::string& text) {
    Reader rd(text);
    MarkedComplex gm;
    bool has_marks = false;
    Complex H = parse_complex(rd, &has_marks, &gm);
    gm.complex = std::move(H);
    gm.marks.resize(gm.complex.R().copy_count());
    return gm;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json complex_to_json_obj(const Complex& H) {
    nlohmann::ordered_json j;
    const auto& R = H.R();
    j["format"] = "hyperembed-complex";
    j["version"] = 1;
    j["base_size"] = R.base_size();
    j["max_size"] = R.max_size();
    auto copies = nlohmann::ordered_json::array();
    for (int c = 0; c < R.copy_count(); ++c) {
        nlohmann::ordered_json jc;
        jc["base"] = R.copy(c).base;
        std::vector<int> sub(1 << R.size(c));
        for (int p = 0; p < (1 << R.size(c)); ++p) sub[p] = R.subcopy(c, p);
        jc["sub"] = sub;
        copies.push_back(jc);
    }
    j["copies"] = copies;
    auto ground = nlohmann::ordered_json::object();
    for (int s : R.singleton_copies()) ground[std::to_string(s)] = H.ground().size(s);
    j["ground"] = ground;
    auto parts = nlohmann::ordered_json::object();
    for (int c = 0; c < R.copy_count(); ++c) {
        if (!H.defined(c)) {
            parts[std::to_string(c)] = nullptr;
            continue;
        }
        auto tuples = nlohmann::ordered_json::array();
        for_each_tuple(H.part(c), H.shape(c), [&](long long, const std::vector<int>& coords) {
            tuples.push_back(coords);
        });
        parts[std::to_string(c)] = tuples;
    }
    j["parts"] = parts;
    return j;
}

Complex complex_from_json_obj(const nlohmann::json& j,
                              std::vector<std::optional<Bitset>>* marks_out) {
    std::vector<IndexComplex::Copy> copies;
    std::vector<std::vector<int>> sub;
    for (const auto& jc : j.at("copies")) {
        copies.push_back({jc.at("base").get<std::vector<int>>()});
        sub.push_back(jc.at("sub").get<std::vector<int>>());
    }
    auto R = std::make_shared<IndexComplex>(IndexComplex::multi(copies, sub));
    std::vector<int> sizes(R->copy_count(), -1);
    for (auto& [key, val] : j.at("ground").items())
        sizes[std::stoi(key)] = val.get<int>();
    auto ground = std::make_shared<Ground>(*R, sizes);
    Complex H(R, ground);
    auto load_bits = [&](int c, const nlohmann::json& tuples, Bitset& bits) {
        const auto& sh = H.shape(c);
        for (const auto& jt : tuples) {
            auto coords = jt.get<std::vector<int>>();
            if (coords.size() != sh.dims.size())
                throw std::invalid_argument("json tuple arity mismatch");
            bits.set(sh.rank(coords));
        }
    };
    for (auto& [key, val] : j.at("parts").items()) {
        int c = std::stoi(key);
        if (val.is_null()) continue;
        H.define(c);
        load_bits(c, val, H.mutable_part(c));
    }
    if (marks_out) {
        marks_out->assign(R->copy_count(), std::nullopt);
        if (j.contains("marks"))
            for (auto& [key, val] : j.at("marks").items()) {
                int c = std::stoi(key);
                (*marks_out)[c].emplace(H.shape(c).total);
                load_bits(c, val, **(marks_out->begin() + c));
            }
    }
    return H;
}

} // namespace

std::string to_json(const Complex& H) { return complex_to_json_obj(H).dump(2) + "\n"; }

std::string to_json(const MarkedComplex& GM) {
    auto j = complex_to_json_obj(GM.complex);
    auto marks = nlohmann::ordered_json::object();
    for (int c = 0; c < GM.complex.R().copy_count(); ++c) {
        if (!GM.marked_defined(c)) continue;
        auto tuples = nlohmann::ordered_json::array();
        for_each_tuple(*GM.marks[c], GM.complex.shape(c),
                       [&](long long, const std::vector<int>& coords) { tuples.push_back(coords); });
        marks[std::to_string(c)] = tuples;
    }
    j["marks"] = marks;
    return j.dump(2) + "\n";
}

Complex complex_from_json(const std::string& text) {
    return complex_from_json_obj(nlohmann::json::parse(text), nullptr);
}

MarkedComplex marked_from_json(const std::string& text) {
    MarkedComplex gm;
    std::vector<std::optional<Bitset>> marks;
    gm.complex = complex_from_json_obj(nlohmann::json::parse(text), &marks);
    gm.marks = std::move(marks);
    return gm;
}

} // namespace hyperembed
