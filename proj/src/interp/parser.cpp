#include "parser.hpp"

#include <optional>

#include "lexer.hpp"

namespace situ3d::interp {

namespace {

// Re-anchors every node of a sub-parsed expression (f-string fields) to the
// line of the surrounding literal.
void set_lines(Expr& e, int line) {
    e.line = line;
    struct Visitor {
        int line;
        void walk(ExprPtr& p) {
            if (p) set_lines(*p, line);
        }
        void operator()(NoneLit&) {}
        void operator()(BoolLit&) {}
        void operator()(IntLit&) {}
        void operator()(FloatLit&) {}
        void operator()(StrLit&) {}
        void operator()(NameRef&) {}
        void operator()(ListLit& n) {
            for (auto& item : n.items) walk(item);
        }
        void operator()(SetLit& n) {
            for (auto& item : n.items) walk(item);
        }
        void operator()(TupleLit& n) {
            for (auto& item : n.items) walk(item);
        }
        void operator()(FStringLit& n) {
            for (auto& part : n.parts) walk(part.expr);
        }
        void operator()(AttributeRef& n) { walk(n.object); }
        void operator()(SubscriptRef& n) {
            walk(n.object);
            walk(n.index);
        }
        void operator()(Call& n) {
            walk(n.callee);
            for (auto& arg : n.args) walk(arg.value);
        }
        void operator()(Unary& n) { walk(n.operand); }
        void operator()(Binary& n) {
            walk(n.lhs);
            walk(n.rhs);
        }
        void operator()(BoolOp& n) {
            for (auto& operand : n.operands) walk(operand);
        }
        void operator()(Compare& n) {
            walk(n.first);
            for (auto& [op, rhs] : n.rest) walk(rhs);
        }
        void operator()(Conditional& n) {
            walk(n.condition);
            walk(n.then_value);
            walk(n.else_value);
        }
        void operator()(Comprehension& n) {
            walk(n.element);
            for (auto& clause : n.clauses) {
                walk(clause.iterable);
                for (auto& cond : clause.conditions) walk(cond);
            }
        }
        void operator()(Lambda& n) { walk(n.body); }
    };
    std::visit(Visitor{line}, e.node);
}

const char* kDisallowedStatements[] = {"import", "from",   "def",    "class", "while",
                                       "with",   "try",    "except", "finally", "raise",
                                       "return", "yield",  "global", "nonlocal", "del",
                                       "assert", "async",  "await"};

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Program parse() {
        Program prog;
        skip_newlines();
        while (!check(Tok::end_of_file)) {
            prog.statements.push_back(statement());
            skip_newlines();
        }
        return prog;
    }

    ExprPtr single_expression() {
        ExprPtr e = expression(true);
        skip_newlines();
        if (!check(Tok::end_of_file)) {
            fail("unexpected token after expression");
        }
        return e;
    }

  private:
    std::vector<Token> toks_;
    size_t pos_ = 0;
    int loop_depth_ = 0;

    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& advance() {
        const Token& t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    bool check(Tok kind) const { return peek().kind == kind; }
    bool check_keyword(const char* word) const {
        return peek().kind == Tok::keyword && peek().text == word;
    }
    bool match(Tok kind) {
        if (!check(kind)) return false;
        advance();
        return true;
    }
    bool match_keyword(const char* word) {
        if (!check_keyword(word)) return false;
        advance();
        return true;
    }
    [[noreturn]] void fail(const std::string& message) const {
        throw SyntaxException{message, peek().line};
    }
    [[noreturn]] void fail_at(const std::string& message, int line) const {
        throw SyntaxException{message, line};
    }
    void expect(Tok kind, const char* what) {
        if (!match(kind)) fail(std::string("expected ") + what);
    }
    void skip_newlines() {
        while (match(Tok::newline)) {
        }
    }

    // ---- statements -------------------------------------------------------

    StmtPtr statement() {
        const Token& t = peek();
        if (t.kind == Tok::keyword) {
            for (const char* bad : kDisallowedStatements) {
                if (t.text == bad) {
                    fail_at(t.text + " is not allowed", t.line);
                }
            }
            if (t.text == "for") return for_statement();
            if (t.text == "if") return if_statement();
            if (t.text == "break" || t.text == "continue") {
                if (loop_depth_ == 0) fail_at("'" + t.text + "' outside loop", t.line);
                int line = t.line;
                bool is_break = t.text == "break";
                advance();
                end_of_simple_statement();
                auto stmt = std::make_unique<Stmt>();
                stmt->line = line;
                if (is_break) {
                    stmt->node = Break{};
                } else {
                    stmt->node = Continue{};
                }
                return stmt;
            }
            if (t.text == "pass") {
                int line = t.line;
                advance();
                end_of_simple_statement();
                auto stmt = std::make_unique<Stmt>();
                stmt->line = line;
                stmt->node = Pass{};
                return stmt;
            }
            if (t.text == "lambda") {
                fail_at("lambda is only allowed as a call argument (e.g. a sort key)",
                        t.line);
            }
        }
        return simple_statement();
    }

    void end_of_simple_statement() {
        if (check(Tok::end_of_file) || check(Tok::dedent)) return;
        if (!match(Tok::newline)) fail("expected end of statement");
    }

    StmtPtr simple_statement() {
        int line = peek().line;
        ExprPtr first = expression_list();

        std::optional<BinKind> aug;
        switch (peek().kind) {
            case Tok::aug_add: aug = BinKind::add; break;
            case Tok::aug_sub: aug = BinKind::sub; break;
            case Tok::aug_mul: aug = BinKind::mul; break;
            case Tok::aug_div: aug = BinKind::div; break;
            case Tok::aug_floordiv: aug = BinKind::floordiv; break;
            case Tok::aug_mod: aug = BinKind::mod; break;
            default: break;
        }
        if (aug) {
            advance();
            AugAssign node;
            node.target = to_target(std::move(first));
            node.op = *aug;
            node.value = expression_list();
            end_of_simple_statement();
            auto stmt = std::make_unique<Stmt>();
            stmt->line = line;
            stmt->node = std::move(node);
            return stmt;
        }

        if (check(Tok::assign)) {
            Assign node;
            node.targets.push_back(to_target(std::move(first)));
            while (match(Tok::assign)) {
                ExprPtr value = expression_list();
                if (check(Tok::assign)) {
                    node.targets.push_back(to_target(std::move(value)));
                } else {
                    node.value = std::move(value);
                }
            }
            end_of_simple_statement();
            auto stmt = std::make_unique<Stmt>();
            stmt->line = line;
            stmt->node = std::move(node);
            return stmt;
        }

        end_of_simple_statement();
        ExprStmt node;
        node.expr = std::move(first);
        auto stmt = std::make_unique<Stmt>();
        stmt->line = line;
        stmt->node = std::move(node);
        return stmt;
    }

    AssignTarget to_target(ExprPtr expr) {
        AssignTarget target;
        target.line = expr->line;
        if (auto* name = std::get_if<NameRef>(&expr->node)) {
            target.kind = AssignTarget::Kind::name;
            target.name = name->name;
            return target;
        }
        if (auto* sub = std::get_if<SubscriptRef>(&expr->node)) {
            target.kind = AssignTarget::Kind::subscript;
            target.object = std::move(sub->object);
            target.index = std::move(sub->index);
            return target;
        }
        if (auto* tup = std::get_if<TupleLit>(&expr->node)) {
            target.kind = AssignTarget::Kind::tuple;
            for (ExprPtr& item : tup->items) {
                auto* name = std::get_if<NameRef>(&item->node);
                if (!name) {
                    fail_at("only names can appear in a tuple assignment target",
                            item->line);
                }
                target.names.push_back(name->name);
            }
            return target;
        }
        fail_at("cannot assign to this expression", expr->line);
    }

    std::vector<StmtPtr> block() {
        expect(Tok::colon, "':'");
        if (!match(Tok::newline)) {
            // single-line body:  if x: print(x)
            std::vector<StmtPtr> body;
            body.push_back(simple_statement());
            return body;
        }
        skip_newlines();
        expect(Tok::indent, "an indented block");
        std::vector<StmtPtr> body;
        skip_newlines();
        while (!check(Tok::dedent) && !check(Tok::end_of_file)) {
            body.push_back(statement());
            skip_newlines();
        }
        match(Tok::dedent);
        return body;
    }

    StmtPtr for_statement() {
        int line = peek().line;
        advance();  // for
        AssignTarget target = loop_target();
        if (!match_keyword("in")) fail("expected 'in' in for statement");
        For node;
        node.target = std::move(target);
        node.iterable = expression(false);
        ++loop_depth_;
        node.body = block();
        --loop_depth_;
        auto stmt = std::make_unique<Stmt>();
        stmt->line = line;
        stmt->node = std::move(node);
        return stmt;
    }

    AssignTarget loop_target() {
        AssignTarget target;
        target.line = peek().line;
        bool parens = match(Tok::lparen);
        std::vector<std::string> names;
        do {
            if (!check(Tok::name)) fail("expected a name in loop target");
            names.push_back(advance().text);
        } while (match(Tok::comma) && !check_keyword("in") && !check(Tok::rparen));
        if (parens) expect(Tok::rparen, "')'");
        if (names.size() == 1) {
            target.kind = AssignTarget::Kind::name;
            target.name = names[0];
        } else {
            target.kind = AssignTarget::Kind::tuple;
            target.names = std::move(names);
        }
        return target;
    }

    StmtPtr if_statement() {
        int line = peek().line;
        advance();  // if
        If node;
        IfBranch first;
        first.condition = expression(false);
        first.body = block();
        node.branches.push_back(std::move(first));
        skip_newlines();
        while (check_keyword("elif")) {
            advance();
            IfBranch branch;
            branch.condition = expression(false);
            branch.body = block();
            node.branches.push_back(std::move(branch));
            skip_newlines();
        }
        if (check_keyword("else")) {
            advance();
            node.else_body = block();
        }
        auto stmt = std::make_unique<Stmt>();
        stmt->line = line;
        stmt->node = std::move(node);
        return stmt;
    }

    // ---- expressions ------------------------------------------------------

    ExprPtr make_expr(int line, ExprNode node) {
        auto e = std::make_unique<Expr>();
        e->line = line;
        e->node = std::move(node);
        return e;
    }

    // expr (',' expr)* — a bare comma list becomes a tuple
    ExprPtr expression_list() {
        int line = peek().line;
        ExprPtr first = expression(false);
        if (!check(Tok::comma)) return first;
        TupleLit tuple;
        tuple.items.push_back(std::move(first));
        while (match(Tok::comma)) {
            if (check(Tok::newline) || check(Tok::assign) || check(Tok::end_of_file)) break;
            tuple.items.push_back(expression(false));
        }
        return make_expr(line, std::move(tuple));
    }

    ExprPtr expression(bool allow_conditional_only) {
        (void)allow_conditional_only;
        return conditional();
    }

    ExprPtr conditional() {
        int line = peek().line;
        ExprPtr value = or_expr();
        if (check_keyword("if")) {
            advance();
            Conditional node;
            node.condition = or_expr();
            if (!match_keyword("else")) fail("expected 'else' in conditional expression");
            node.then_value = std::move(value);
            node.else_value = conditional();
            return make_expr(line, std::move(node));
        }
        return value;
    }

    ExprPtr or_expr() {
        int line = peek().line;
        ExprPtr first = and_expr();
        if (!check_keyword("or")) return first;
        BoolOp node;
        node.op = BoolKind::logical_or;
        node.operands.push_back(std::move(first));
        while (match_keyword("or")) node.operands.push_back(and_expr());
        return make_expr(line, std::move(node));
    }

    ExprPtr and_expr() {
        int line = peek().line;
        ExprPtr first = not_expr();
        if (!check_keyword("and")) return first;
        BoolOp node;
        node.op = BoolKind::logical_and;
        node.operands.push_back(std::move(first));
        while (match_keyword("and")) node.operands.push_back(not_expr());
        return make_expr(line, std::move(node));
    }

    ExprPtr not_expr() {
        if (check_keyword("not")) {
            int line = peek().line;
            advance();
            Unary node;
            node.op = UnaryKind::logical_not;
            node.operand = not_expr();
            return make_expr(line, std::move(node));
        }
        return comparison();
    }

    std::optional<CmpKind> comparison_op() {
        switch (peek().kind) {
            case Tok::op_eq: return CmpKind::eq;
            case Tok::op_ne: return CmpKind::ne;
            case Tok::op_lt: return CmpKind::lt;
            case Tok::op_le: return CmpKind::le;
            case Tok::op_gt: return CmpKind::gt;
            case Tok::op_ge: return CmpKind::ge;
            case Tok::keyword:
                if (peek().text == "in") return CmpKind::in;
                if (peek().text == "is") {
                    return peek(1).kind == Tok::keyword && peek(1).text == "not"
                               ? CmpKind::is_not
                               : CmpKind::is;
                }
                if (peek().text == "not" && peek(1).kind == Tok::keyword &&
                    peek(1).text == "in") {
                    return CmpKind::not_in;
                }
                return std::nullopt;
            default: return std::nullopt;
        }
    }

    ExprPtr comparison() {
        int line = peek().line;
        ExprPtr first = additive();
        std::optional<CmpKind> op = comparison_op();
        if (!op) return first;
        Compare node;
        node.first = std::move(first);
        while ((op = comparison_op())) {
            advance();
            if (*op == CmpKind::not_in || *op == CmpKind::is_not) advance();
            node.rest.emplace_back(*op, additive());
        }
        return make_expr(line, std::move(node));
    }

    ExprPtr additive() {
        int line = peek().line;
        ExprPtr lhs = multiplicative();
        while (check(Tok::op_plus) || check(Tok::op_minus)) {
            BinKind op = check(Tok::op_plus) ? BinKind::add : BinKind::sub;
            advance();
            Binary node;
            node.op = op;
            node.lhs = std::move(lhs);
            node.rhs = multiplicative();
            lhs = make_expr(line, std::move(node));
        }
        return lhs;
    }

    ExprPtr multiplicative() {
        int line = peek().line;
        ExprPtr lhs = unary();
        while (check(Tok::op_star) || check(Tok::op_slash) || check(Tok::op_dslash) ||
               check(Tok::op_percent)) {
            BinKind op = BinKind::mul;
            if (check(Tok::op_slash)) op = BinKind::div;
            if (check(Tok::op_dslash)) op = BinKind::floordiv;
            if (check(Tok::op_percent)) op = BinKind::mod;
            advance();
            Binary node;
            node.op = op;
            node.lhs = std::move(lhs);
            node.rhs = unary();
            lhs = make_expr(line, std::move(node));
        }
        return lhs;
    }

    ExprPtr unary() {
        if (check(Tok::op_minus) || check(Tok::op_plus)) {
            int line = peek().line;
            UnaryKind op = check(Tok::op_minus) ? UnaryKind::neg : UnaryKind::pos;
            advance();
            Unary node;
            node.op = op;
            node.operand = unary();
            return make_expr(line, std::move(node));
        }
        return power();
    }

    ExprPtr power() {
        int line = peek().line;
        ExprPtr base = postfix();
        if (check(Tok::op_dstar)) {
            advance();
            Binary node;
            node.op = BinKind::pow;
            node.lhs = std::move(base);
            node.rhs = unary();  // right-associative, allows 2 ** -1
            return make_expr(line, std::move(node));
        }
        return base;
    }

    ExprPtr postfix() {
        ExprPtr expr = atom();
        while (true) {
            if (check(Tok::dot)) {
                int line = peek().line;
                advance();
                if (!check(Tok::name) && !check(Tok::keyword)) {
                    fail("expected an attribute name after '.'");
                }
                AttributeRef node;
                node.object = std::move(expr);
                node.name = advance().text;
                expr = make_expr(line, std::move(node));
            } else if (check(Tok::lbracket)) {
                int line = peek().line;
                advance();
                if (check(Tok::colon)) fail("slice subscripts are not supported");
                SubscriptRef node;
                node.object = std::move(expr);
                node.index = expression(false);
                if (check(Tok::colon)) fail("slice subscripts are not supported");
                expect(Tok::rbracket, "']'");
                expr = make_expr(line, std::move(node));
            } else if (check(Tok::lparen)) {
                int line = peek().line;
                advance();
                Call node;
                node.callee = std::move(expr);
                node.args = call_arguments();
                expr = make_expr(line, std::move(node));
            } else {
                break;
            }
        }
        return expr;
    }

    std::vector<CallArg> call_arguments() {
        std::vector<CallArg> args;
        bool saw_keyword = false;
        while (!check(Tok::rparen)) {
            CallArg arg;
            if (check(Tok::name) && peek(1).kind == Tok::assign) {
                arg.keyword = advance().text;
                advance();  // '='
                saw_keyword = true;
            } else if (saw_keyword) {
                fail("positional argument follows keyword argument");
            }
            if (check_keyword("lambda")) {
                arg.value = lambda_expression();
            } else {
                arg.value = expression(false);
            }
            args.push_back(std::move(arg));
            if (!match(Tok::comma)) break;
        }
        expect(Tok::rparen, "')'");
        return args;
    }

    ExprPtr lambda_expression() {
        int line = peek().line;
        advance();  // lambda
        Lambda node;
        while (check(Tok::name)) {
            node.params.push_back(advance().text);
            if (!match(Tok::comma)) break;
        }
        if (node.params.empty()) fail("lambda needs at least one parameter");
        expect(Tok::colon, "':'");
        node.body = expression(false);
        return make_expr(line, std::move(node));
    }

    ExprPtr atom() {
        const Token& t = peek();
        int line = t.line;
        switch (t.kind) {
            case Tok::int_lit: {
                advance();
                return make_expr(line, IntLit{t.int_value});
            }
            case Tok::float_lit: {
                advance();
                return make_expr(line, FloatLit{t.float_value});
            }
            case Tok::str_lit: {
                advance();
                return make_expr(line, StrLit{t.text});
            }
            case Tok::fstr_lit: {
                advance();
                return fstring(t.text, line);
            }
            case Tok::name: {
                advance();
                return make_expr(line, NameRef{t.text});
            }
            case Tok::keyword: {
                if (t.text == "None") {
                    advance();
                    return make_expr(line, NoneLit{});
                }
                if (t.text == "True" || t.text == "False") {
                    advance();
                    return make_expr(line, BoolLit{t.text == "True"});
                }
                if (t.text == "lambda") {
                    fail_at("lambda is only allowed as a call argument (e.g. a sort key)",
                            line);
                }
                for (const char* bad : kDisallowedStatements) {
                    if (t.text == bad) fail_at(t.text + " is not allowed", line);
                }
                fail("unexpected keyword '" + t.text + "'");
            }
            case Tok::lparen: {
                advance();
                if (check(Tok::rparen)) {
                    advance();
                    return make_expr(line, TupleLit{});
                }
                ExprPtr first = expression(false);
                if (check_keyword("for")) fail("generator expressions are not supported");
                if (check(Tok::comma)) {
                    TupleLit tuple;
                    tuple.items.push_back(std::move(first));
                    while (match(Tok::comma)) {
                        if (check(Tok::rparen)) break;
                        tuple.items.push_back(expression(false));
                    }
                    expect(Tok::rparen, "')'");
                    return make_expr(line, std::move(tuple));
                }
                expect(Tok::rparen, "')'");
                return first;
            }
            case Tok::lbracket: {
                advance();
                if (check(Tok::rbracket)) {
                    advance();
                    return make_expr(line, ListLit{});
                }
                ExprPtr first = expression(false);
                if (check_keyword("for")) {
                    Comprehension comp;
                    comp.kind = CompKind::list;
                    comp.element = std::move(first);
                    comp.clauses = comp_clauses();
                    expect(Tok::rbracket, "']'");
                    return make_expr(line, std::move(comp));
                }
                ListLit list;
                list.items.push_back(std::move(first));
                while (match(Tok::comma)) {
                    if (check(Tok::rbracket)) break;
                    list.items.push_back(expression(false));
                }
                expect(Tok::rbracket, "']'");
                return make_expr(line, std::move(list));
            }
            case Tok::lbrace: {
                advance();
                if (check(Tok::rbrace)) {
                    fail("dict literals are not supported; use set() for an empty set");
                }
                ExprPtr first = expression(false);
                if (check(Tok::colon)) fail("dict literals are not supported");
                if (check_keyword("for")) {
                    Comprehension comp;
                    comp.kind = CompKind::set;
                    comp.element = std::move(first);
                    comp.clauses = comp_clauses();
                    expect(Tok::rbrace, "'}'");
                    return make_expr(line, std::move(comp));
                }
                SetLit set;
                set.items.push_back(std::move(first));
                while (match(Tok::comma)) {
                    if (check(Tok::rbrace)) break;
                    set.items.push_back(expression(false));
                }
                expect(Tok::rbrace, "'}'");
                return make_expr(line, std::move(set));
            }
            default:
                fail("unexpected token");
        }
    }

    std::vector<CompClause> comp_clauses() {
        std::vector<CompClause> clauses;
        while (check_keyword("for")) {
            advance();
            CompClause clause;
            bool parens = match(Tok::lparen);
            do {
                if (!check(Tok::name)) fail("expected a name in comprehension target");
                clause.targets.push_back(advance().text);
            } while (match(Tok::comma) && !check_keyword("in") && !check(Tok::rparen));
            if (parens) expect(Tok::rparen, "')'");
            if (!match_keyword("in")) fail("expected 'in' in comprehension");
            clause.iterable = or_expr();
            while (check_keyword("if")) {
                advance();
                clause.conditions.push_back(or_expr());
            }
            clauses.push_back(std::move(clause));
        }
        if (clauses.empty()) fail("expected 'for' in comprehension");
        return clauses;
    }

    // Splits f-string text into literal and {expression} parts. Escapes in
    // literal segments are resolved here; expression text is re-lexed.
    ExprPtr fstring(const std::string& raw, int line) {
        FStringLit lit;
        std::string literal;
        size_t i = 0;
        auto flush = [&]() {
            if (!literal.empty()) {
                FStringPart part;
                part.literal = std::move(literal);
                literal.clear();
                lit.parts.push_back(std::move(part));
            }
        };
        auto unescape = [&](char e) {
            switch (e) {
                case 'n': literal += '\n'; break;
                case 't': literal += '\t'; break;
                case 'r': literal += '\r'; break;
                case '\\': literal += '\\'; break;
                case '\'': literal += '\''; break;
                case '"': literal += '"'; break;
                default:
                    literal += '\\';
                    literal += e;
                    break;
            }
        };
        while (i < raw.size()) {
            char c = raw[i];
            if (c == '{' && i + 1 < raw.size() && raw[i + 1] == '{') {
                literal += '{';
                i += 2;
                continue;
            }
            if (c == '}' && i + 1 < raw.size() && raw[i + 1] == '}') {
                literal += '}';
                i += 2;
                continue;
            }
            if (c == '}') fail_at("single '}' is not allowed in f-string", line);
            if (c == '\\' && i + 1 < raw.size()) {
                unescape(raw[i + 1]);
                i += 2;
                continue;
            }
            if (c != '{') {
                literal += c;
                ++i;
                continue;
            }
            // expression field: scan to the matching '}' honoring nesting and
            // nested string quotes
            flush();
            ++i;
            size_t start = i;
            int depth = 0;
            char quote = 0;
            size_t spec_colon = std::string::npos;
            while (i < raw.size()) {
                char d = raw[i];
                if (quote != 0) {
                    if (d == '\\') {
                        i += 2;
                        continue;
                    }
                    if (d == quote) quote = 0;
                } else if (d == '\'' || d == '"') {
                    quote = d;
                } else if (d == '(' || d == '[' || d == '{') {
                    ++depth;
                } else if (d == ')' || d == ']') {
                    --depth;
                } else if (d == '}') {
                    if (depth == 0) break;
                    --depth;
                } else if (d == ':' && depth == 0 && spec_colon == std::string::npos) {
                    spec_colon = i;
                }
                ++i;
            }
            if (i >= raw.size()) fail_at("unterminated expression in f-string", line);
            size_t end = i;
            ++i;  // past '}'

            std::string inner = raw.substr(start, end - start);
            std::string spec;
            if (spec_colon != std::string::npos) {
                spec = raw.substr(spec_colon + 1, end - spec_colon - 1);
                inner = raw.substr(start, spec_colon - start);
            }
            char conversion = 0;
            if (inner.size() >= 2 && inner[inner.size() - 2] == '!' &&
                (inner.back() == 'r' || inner.back() == 's')) {
                conversion = inner.back();
                inner = inner.substr(0, inner.size() - 2);
            }
            if (inner.empty()) fail_at("empty expression in f-string", line);
            FStringPart part;
            part.expr = parse_expression_text(inner, line);
            part.format_spec = spec;
            part.conversion = conversion;
            lit.parts.push_back(std::move(part));
        }
        flush();
        return make_expr(line, std::move(lit));
    }
};

}  // namespace

Program parse_program(const std::string& source) {
    try {
        Parser parser(tokenize(source));
        return parser.parse();
    } catch (const LexError& e) {
        throw SyntaxException{e.message, e.line};
    }
}

ExprPtr parse_expression_text(const std::string& text, int line) {
    try {
        Parser parser(tokenize(text));
        ExprPtr e = parser.single_expression();
        set_lines(*e, line);
        return e;
    } catch (const LexError& e) {
        throw SyntaxException{e.message, line};
    } catch (SyntaxException& e) {
        e.line = line;
        throw;
    }
}

}  // namespace situ3d::interp
