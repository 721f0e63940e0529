#include "gridflow/grid_case.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gridflow {

std::string to_string(BusKind kind) {
    switch (kind) {
        case BusKind::Slack: return "slack";
        case BusKind::Pv: return "pv";
        case BusKind::Pq: return "pq";
    }
    return "?";
}

std::vector<int> GridCase::pv_buses() const {
    std::vector<int> out;
    for (const Bus& b : buses)
        if (b.kind == BusKind::Pv) out.push_back(b.index);
    return out;
}

std::vector<int> GridCase::pq_buses() const {
    std::vector<int> out;
    for (const Bus& b : buses)
        if (b.kind == BusKind::Pq) out.push_back(b.index);
    return out;
}

void GridCase::validate() const {
    if (base_mva <= 0.0) throw CaseError("base_mva must be positive");
    if (buses.empty()) throw CaseError("case has no buses");
    int slack_count = 0;
    for (const Bus& b : buses) {
        if (b.kind == BusKind::Slack) ++slack_count;
        if (b.p_min > b.p_max)
            throw CaseError("bus " + std::to_string(b.index + 1) + ": pmin > pmax");
        if (b.q_min > b.q_max)
            throw CaseError("bus " + std::to_string(b.index + 1) + ": qmin > qmax");
        if (!(b.v_min > 0.0) || b.v_min > b.v_max)
            throw CaseError("bus " + std::to_string(b.index + 1) +
                            ": need 0 < vmin <= vmax");
    }
    if (slack_count != 1)
        throw CaseError("expected exactly one slack bus, found " +
                        std::to_string(slack_count));
    for (const Branch& br : branches) {
        if (br.from_bus < 0 || br.from_bus >= n_bus() || br.to_bus < 0 ||
            br.to_bus >= n_bus())
            throw CaseError("branch endpoint out of range");
        if (br.from_bus == br.to_bus) throw CaseError("branch connects a bus to itself");
        if (!(br.s_max > 0.0)) throw CaseError("branch smax must be positive");
    }
}

namespace {

struct TokenLine {
    int number;
    std::vector<std::string> tokens;
};

double parse_float(const TokenLine& line, const std::string& tok) {
    try {
        std::size_t pos = 0;
        double v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw CaseParseError(line.number, "expected number, got '" + tok + "'");
    }
}

int parse_int(const TokenLine& line, const std::string& tok) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw CaseParseError(line.number, "expected integer, got '" + tok + "'");
    }
}

// Finds `key` in the token list and returns the following token.
const std::string& keyed(const TokenLine& line, const char* key, std::size_t at) {
    if (at + 1 >= line.tokens.size() || line.tokens[at] != key)
        throw CaseParseError(line.number,
                             std::string("expected '") + key + " <value>'");
    return line.tokens[at + 1];
}

}  // namespace

GridCase parse_case(const std::string& text) {
    std::vector<TokenLine> lines;
    {
        std::istringstream in(text);
        std::string raw;
        int number = 0;
        while (std::getline(in, raw)) {
            ++number;
            auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            std::istringstream ls(raw);
            TokenLine tl{number, {}};
            std::string tok;
            while (ls >> tok) tl.tokens.push_back(tok);
            if (!tl.tokens.empty()) lines.push_back(std::move(tl));
        }
    }
    if (lines.empty()) throw CaseParseError(0, "empty case file");

    const TokenLine& header = lines.front();
    if (header.tokens[0] != "case" || header.tokens.size() != 4)
        throw CaseParseError(header.number,
                             "expected header 'case <name> base_mva <float>'");
    GridCase grid;
    grid.name = header.tokens[1];
    if (header.tokens[2] != "base_mva")
        throw CaseParseError(header.number, "expected 'base_mva' in header");
    grid.base_mva = parse_float(header, header.tokens[3]);

    std::vector<bool> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const TokenLine& ln = lines[i];
        if (ln.tokens[0] == "bus") {
            if (ln.tokens.size() != 25)
                throw CaseParseError(ln.number, "bus line needs 25 tokens");
            Bus bus;
            bus.index = parse_int(ln, ln.tokens[1]) - 1;
            const std::string& kind = ln.tokens[2];
            if (kind == "slack") bus.kind = BusKind::Slack;
            else if (kind == "pv") bus.kind = BusKind::Pv;
            else if (kind == "pq") bus.kind = BusKind::Pq;
            else throw CaseParseError(ln.number, "unknown bus kind '" + kind + "'");
            bus.p_min = parse_float(ln, keyed(ln, "pmin", 3));
            bus.p_max = parse_float(ln, keyed(ln, "pmax", 5));
            bus.q_min = parse_float(ln, keyed(ln, "qmin", 7));
            bus.q_max = parse_float(ln, keyed(ln, "qmax", 9));
            bus.v_min = parse_float(ln, keyed(ln, "vmin", 11));
            bus.v_max = parse_float(ln, keyed(ln, "vmax", 13));
            bus.p_load_nom = parse_float(ln, keyed(ln, "pload", 15));
            bus.q_load_nom = parse_float(ln, keyed(ln, "qload", 17));
            bus.v_setpoint = parse_float(ln, keyed(ln, "vset", 19));
            bus.shunt_g = parse_float(ln, keyed(ln, "gsh", 21));
            bus.shunt_b = parse_float(ln, keyed(ln, "bsh", 23));
            int idx = bus.index;
            if (idx < 0) throw CaseParseError(ln.number, "bus index must be >= 1");
            if (static_cast<std::size_t>(idx) >= seen.size()) seen.resize(idx + 1, false);
            if (seen[idx])
                throw CaseParseError(ln.number,
                                     "duplicate bus index " + std::to_string(idx + 1));
            seen[idx] = true;
            if (static_cast<std::size_t>(idx) >= grid.buses.size())
                grid.buses.resize(idx + 1);
            grid.buses[idx] = bus;
        } else if (ln.tokens[0] == "branch") {
            if (ln.tokens.size() != 9)
                throw CaseParseError(ln.number, "branch line needs 9 tokens");
            Branch br;
            br.from_bus = parse_int(ln, ln.tokens[1]) - 1;
            br.to_bus = parse_int(ln, ln.tokens[2]) - 1;
            br.g = parse_float(ln, keyed(ln, "g", 3));
            br.b = parse_float(ln, keyed(ln, "b", 5));
            br.s_max = parse_float(ln, keyed(ln, "smax", 7));
            grid.branches.push_back(br);
        } else {
            throw CaseParseError(ln.number, "unknown record '" + ln.tokens[0] + "'");
        }
    }

    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw CaseError("bus indices not dense: missing bus " +
                            std::to_string(i + 1));
    for (const Bus& b : grid.buses)
        if (b.kind == BusKind::Slack) grid.slack_bus = b.index;
    grid.validate();
    return grid;
}

std::string serialize_case(const GridCase& grid) {
    char buf[512];
    std::string out;
    std::snprintf(buf, sizeof(buf), "case %s base_mva %.17g\n", grid.name.c_str(),
                  grid.base_mva);
    out += buf;
    for (const Bus& b : grid.buses) {
        std::snprintf(buf, sizeof(buf),
                      "bus %d %s pmin %.17g pmax %.17g qmin %.17g qmax %.17g "
                      "vmin %.17g vmax %.17g pload %.17g qload %.17g vset %.17g "
                      "gsh %.17g bsh %.17g\n",
                      b.index + 1, to_string(b.kind).c_str(), b.p_min, b.p_max,
                      b.q_min, b.q_max, b.v_min, b.v_max, b.p_load_nom, b.q_load_nom,
                      b.v_setpoint, b.shunt_g, b.shunt_b);
        out += buf;
    }
    for (const Branch& br : grid.branches) {
        std::snprintf(buf, sizeof(buf), "branch %d %d g %.17g b %.17g smax %.17g\n",
                      br.from_bus + 1, br.to_bus + 1, br.g, br.b, br.s_max);
        out += buf;
    }
    return out;
}

GridCase load_case_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CaseError("cannot open case file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_case(ss.str());
}

AdmittanceMatrix build_admittance(const GridCase& grid) {
    const int n = grid.n_bus();
    AdmittanceMatrix y;
    y.G = Eigen::MatrixXd::Zero(n, n);
    y.B = Eigen::MatrixXd::Zero(n, n);
    for (const Branch& br : grid.branches) {
        int i = br.from_bus, j = br.to_bus;
        y.G(i, j) += br.g;
        y.G(j, i) = y.G(i, j);
        y.B(i, j) += br.b;
        y.B(j, i) = y.B(i, j);
        // Series admittance is the negated off-diagonal contribution.
        y.G(i, i) -= br.g;
        y.G(j, j) -= br.g;
        y.B(i, i) -= br.b;
        y.B(j, j) -= br.b;
    }
    for (const Bus& b : grid.buses) {
        y.G(b.index, b.index) += b.shunt_g;
        y.B(b.index, b.index) += b.shunt_b;
    }
    return y;
}

std::pair<double, double> branch_admittance_from_impedance(double r, double x) {
    std::complex<double> y = -1.0 / std::complex<double>(r, x);
    return {y.real(), y.imag()};
}

}  // namespace gridflow
