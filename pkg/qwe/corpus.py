"""Named example problems."""
from qwe.terms import parse_problem

# Regular-oriented: each variable at most once per side, same order on both sides
REGULAR_ORIENTED = {
    'xab=abx': "vars: x; eq: x a b = a b x;",
    'xy=yz': "vars: x y z; alpha: a b; eq: x y = y z;",
    'xaby=yz': "vars: x y z; eq: x a b y = y z;",
    'xz=zy': "vars: x y z; alpha: a b; eq: x z = z y;",
    'ax=xa': "vars: x; eq: a x = x a;",
    'xa=ay': "vars: x y; eq: x a = a y;",
    'xyz=zw': "vars: x y z w; alpha: a b; eq: x y z = z w;",
    'axb=yb': "vars: x y; eq: a x b = y b;",
    'xay=yaz': "vars: x y z; eq: x a y = y a z;",
    'xb=by': "vars: x y; eq: x b = b y;",
    'abx=xab': "vars: x; eq: a b x = x a b;",
    'xya=ayz': "vars: x y z; eq: x y a = a y z;",
    'x=y': "vars: x y; alpha: a b; eq: x = y;",
    'xa=yb': "vars: x y; eq: x a = y b;",
}

# Quadratic but not regular-oriented
QUADRATIC = {
    'xy=yx': "vars: x y; alpha: a b; eq: x y = y x;",
    'xaby=yabx': "vars: x y; eq: x a b y = y a b x;",
    'xxyy=zz': "vars: x y z; alpha: a b; eq: x x y y = z z;",
    'xay=ybx': "vars: x y; eq: x a y = y b x;",
}

# The two readings of the conjugacy example under x, y in #(a+b)*
CONJUGACY = {
    'marked-xz=zy': "vars: x y z; eq: x z = z y; re: x in /#(a|b)*/; re: y in /#(a|b)*/;",
    'marked-xy=yz': "vars: x y z; eq: x y = y z; re: x in /#(a|b)*/; re: y in /#(a|b)*/;",
}

# Worked examples with length constraints and their expected verdicts
WORKED = {
    'periodic': ("vars: x; eq: x a b = a b x;", 'SAT'),
    'shifted-sat': ("vars: x y z; eq: x a b y = y z; len: |z| = |x| + 2 && |x| <= 3;", 'SAT'),
    'shifted-unsat': ("vars: x y z; eq: x a b y = y z; len: |x| = |z| && |x| <= 5 && |z| <= 5;", 'UNSAT'),
    'no-solution': ("vars: x y; eq: x a = y b;", 'UNSAT'),
    'marked-periodic': ("vars: x; eq: x a b = a b x; re: x in /aba*/;", 'SAT'),
    'marked-periodic-unsat': ("vars: x; eq: x a b = a b x; re: x in /b(a|b)*/;", 'UNSAT'),
    'conjugacy-sat': ("vars: x y z; eq: x z = z y; re: x in /#(a|b)*/; re: y in /#(a|b)*/; "
                      "len: |x| = 3 && |z| = 9;", 'SAT'),
    'conjugacy-unsat': ("vars: x y z; eq: x z = z y; re: x in /#(a|b)*/; re: y in /#(a|b)*/; "
                        "len: |x| = 3 && |z| = 7;", 'UNSAT'),
}


def problem(name):
    """Parse a corpus problem by name."""
    for table in (REGULAR_ORIENTED, QUADRATIC, CONJUGACY):
        if name in table:
            return parse_problem(table[name])
    if name in WORKED:
        return parse_problem(WORKED[name][0])
    raise KeyError(f"no corpus problem named {name!r}")


def regular_oriented():
    return {name: parse_problem(source) for name, source in REGULAR_ORIENTED.items()}


def quadratic():
    return {name: parse_problem(source) for name, source in QUADRATIC.items()}
