#include "freqcorr/cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "freqcorr/cli/config.hpp"
#include "freqcorr/units.hpp"

namespace freqcorr::cli
{

namespace
{

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s)
    {
        if (c == sep)
        {
            out.push_back(trim(cur));
            cur.clear();
        }
        else
            cur += c;
    }
    out.push_back(trim(cur));
    return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& message)
{
    throw InputError("line " + std::to_string(line) + ": " + message);
}

double parse_number(const std::string& field, std::size_t line, const char* column)
{
    double v = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    if (!field.empty() && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        fail(line, std::string("column '") + column + "': not a finite number: '" + field + "'");
    return v;
}

} // namespace

std::string format_number(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

fringe::FringeScan FringeTable::to_scan() const
{
    fringe::FringeScan scan;
    scan.thetas.reserve(theta_deg.size());
    for (double d : theta_deg)
        scan.thetas.push_back(units::rad_from_deg(d));
    scan.counts = counts;
    scan.count_errors = counts_err;
    scan.kind = kind;
    scan.validate();
    return scan;
}

FringeTable parse_fringe_csv(const std::string& text)
{
    FringeTable table;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    bool header_seen = false;
    std::size_t columns = 0;

    while (std::getline(in, raw))
    {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty())
            continue;
        if (line[0] == '#')
        {
            if (header_seen)
                continue;
            const std::string body = trim(line.substr(1));
            const auto eq = body.find('=');
            if (eq == std::string::npos)
                continue;
            const std::string key = trim(body.substr(0, eq));
            const std::string value = trim(body.substr(eq + 1));
            if (key == "kind")
            {
                if (value == "counts")
                    table.kind = fringe::CountKind::poisson_counts;
                else if (value == "normalized")
                    table.kind = fringe::CountKind::normalized;
                else
                    fail(line_no, "kind must be 'counts' or 'normalized', got '" + value + "'");
            }
            table.metadata.emplace_back(key, value);
            continue;
        }
        const auto fields = split(line, ',');
        if (!header_seen)
        {
            if (fields.size() == 2 && fields[0] == "theta_deg" && fields[1] == "counts")
                columns = 2;
            else if (fields.size() == 3 && fields[0] == "theta_deg" && fields[1] == "counts" &&
                     fields[2] == "counts_err")
                columns = 3;
            else
                fail(line_no, "expected header 'theta_deg,counts[,counts_err]', got '" + line + "'");
            header_seen = true;
            continue;
        }
        if (fields.size() != columns)
            fail(line_no, "expected " + std::to_string(columns) + " columns, got " +
                              std::to_string(fields.size()));
        const double theta = parse_number(fields[0], line_no, "theta_deg");
        const double count = parse_number(fields[1], line_no, "counts");
        if (count < 0.0)
            fail(line_no, "counts must be >= 0");
        if (!table.theta_deg.empty() && !(theta > table.theta_deg.back()))
            fail(line_no, "theta_deg must be strictly increasing");
        table.theta_deg.push_back(theta);
        table.counts.push_back(count);
        if (columns == 3)
        {
            const double err = parse_number(fields[2], line_no, "counts_err");
            if (!(err > 0.0))
                fail(line_no, "counts_err must be positive");
            table.counts_err.push_back(err);
        }
    }
    if (!header_seen)
        throw InputError("missing header 'theta_deg,counts[,counts_err]'");
    if (table.counts.size() < kMinFringeRows)
        throw InputError("schema: need at least " + std::to_string(kMinFringeRows) +
                         " data rows, found " + std::to_string(table.counts.size()));
    return table;
}

FringeTable read_fringe_csv(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << f.rdbuf();
    try
    {
        return parse_fringe_csv(ss.str());
    }
    catch (const IoError&)
    {
        throw;
    }
    catch (const InputError& e)
    {
        throw InputError(path + ": " + e.what());
    }
}

std::string format_fringe_csv(const FringeTable& table, const std::vector<std::string>& comments)
{
    std::ostringstream out;
    for (const auto& c : comments)
        out << "# " << c << '\n';
    out << "# kind = "
        << (table.kind == fringe::CountKind::normalized ? "normalized" : "counts") << '\n';
    const bool with_err = !table.counts_err.empty();
    out << (with_err ? "theta_deg,counts,counts_err\n" : "theta_deg,counts\n");
    for (std::size_t i = 0; i < table.counts.size(); ++i)
    {
        out << format_number(table.theta_deg[i]) << ',' << format_number(table.counts[i]);
        if (with_err)
            out << ',' << format_number(table.counts_err[i]);
        out << '\n';
    }
    return out.str();
}

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-")
    {
        std::cout << text;
        std::cout.flush();
        if (!std::cout)
            throw IoError("cannot write to stdout");
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("cannot open '" + path + "' for writing");
    f << text;
    f.close();
    if (!f)
        throw IoError("failed writing '" + path + "'");
}

void write_fringe_csv(const std::string& path, const FringeTable& table,
                      const std::vector<std::string>& comments)
{
    write_text(path, format_fringe_csv(table, comments));
}

} // namespace freqcorr::cli
