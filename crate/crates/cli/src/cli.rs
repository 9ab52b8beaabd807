use clap::{Arg, ArgAction, Command};

fn one(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).num_args(1).value_name("VALUE").help(help)
}

fn many(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).num_args(1..).value_name("VALUE").help(help)
}

fn operator() -> Arg {
    Arg::new("A").long("A").num_args(1).value_name("SPEC").help(
        "operator: leftdiag:a,b,.. | rightdiag:.. | ad:a,..;b,.. | upper:a,b,c | schur-collinear:n | condexp:N,k | left:@file | right:@file | schur:@file | dense:@file",
    )
}

fn global(arg: Arg) -> Arg {
    arg.global(true)
}

pub fn command() -> Command {
    Command::new("nclp")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Reproducible experiments on Schatten classes, square functions and semigroup models")
        .subcommand_required(true)
        .arg_required_else_help(false)
        .arg(global(many("p", "Schatten exponent(s); 'inf' allowed")))
        .arg(global(one("dim", "matrix dimension")))
        .arg(global(one("grid", "quadrature window and node count: tmin,tmax,n")))
        .arg(global(one("seed", "seed for every random draw")))
        .arg(global(one("samples", "number of random samples")))
        .arg(global(one("out", "output file (stdout when absent)")))
        .arg(global(one("format", "csv or json")))
        .arg(global(Arg::new("strict").long("strict").action(ArgAction::SetTrue).help("treat solver budget warnings as failures")))
        .arg(global(one("config", "flat JSON object of option values; flags override it")))
        .subcommand(
            Command::new("schatten-selftest")
                .about("Duality pairing, Hölder bound and polar dual on random matrices"),
        )
        .subcommand(
            Command::new("khintchine")
                .about("Rademacher average against the column/row norms on random families")
                .arg(one("family", "family length"))
                .arg(one("iterations", "convex solver iteration budget")),
        )
        .subcommand(
            Command::new("tensor-extend")
                .about("Column and row norms under a random contraction acting on the index space")
                .arg(one("family", "family length")),
        )
        .subcommand(
            Command::new("calculus-check")
                .about("Contour or extended calculus against the eigendecomposition")
                .arg(many("fn", "function ids: g, gn:<n>, zexp, sqrtzexp, zis:<s>, heat:<t>"))
                .arg(operator()),
        )
        .subcommand(
            Command::new("identities")
                .about("Quadrature identities of the functional calculus")
                .subcommand_required(true)
                .subcommand(
                    Command::new("group-average")
                        .about("Gaussian average of a unitary group against exp(-B^2/2)")
                        .arg(one("diag", "diagonal of B (or of a for the Ad form)"))
                        .arg(one("ad-right", "diagonal of b; switches to B = Ad(a,b)"))
                        .arg(one("nodes", "Gauss-Hermite nodes")),
                )
                .subcommand(
                    Command::new("subordination")
                        .about("Subordination integral against exp(-t C^{1/2})")
                        .arg(one("diag", "diagonal of C (or of a for the Ad form)"))
                        .arg(many("t", "times"))
                        .arg(one("nodes", "quadrature nodes"))
                        .arg(Arg::new("ad").long("ad").action(ArgAction::SetTrue).help("use C = Ad(a,a)^2")),
                ),
        )
        .subcommand(
            Command::new("sector-profile")
                .about("Spectral angle and sampled resolvent constants")
                .arg(operator())
                .arg(many("theta", "probe angles")),
        )
        .subcommand(
            Command::new("rbound")
                .about("Rad, Col and Row boundedness estimates of resolvent families")
                .arg(operator())
                .arg(many("theta", "probe angles"))
                .arg(many("notion", "rad, col, row"))
                .arg(one("restarts", "search restarts"))
                .arg(one("lengths", "family lengths, comma separated")),
        )
        .subcommand(sqfn_equiv(Command::new("sqfn-equiv")))
        .subcommand(rowcol_gap(Command::new("rowcol-gap")))
        .subcommand(
            Command::new("sqfn")
                .about("Square function experiments")
                .subcommand_required(true)
                .subcommand(sqfn_equiv(Command::new("equiv")))
                .subcommand(rowcol_gap(Command::new("rowcol-gap"))),
        )
        .subcommand(
            Command::new("schur")
                .about("Schur multiplier semigroups with distance symbols")
                .arg(one("points", "collinear point count"))
                .arg(one("alpha", "points alpha_i as 'x,y;x,y;..'"))
                .arg(one("beta", "points beta_j as 'x,y;x,y;..'"))
                .arg(many("t", "times"))
                .arg(one("fn", "function id for the bounded calculus")),
        )
        .subcommand(
            Command::new("freegroup")
                .about("Free group algebra experiments")
                .subcommand_required(true)
                .subcommand(
                    Command::new("norms")
                        .about("Even L^p norms of a polynomial")
                        .arg(one("rank", "number of generators"))
                        .arg(one("len", "word length"))
                        .arg(one("terms", "number of random terms"))
                        .arg(one("poly", "polynomial file ('word re im' per line)")),
                )
                .subcommand(
                    Command::new("poisson")
                        .about("Contractivity of the Poisson semigroup on random polynomials")
                        .arg(one("rank", "number of generators"))
                        .arg(one("len", "largest word length"))
                        .arg(one("terms", "terms per length"))
                        .arg(many("t", "times")),
                )
                .subcommand(
                    Command::new("dyadic")
                        .about("Sign changes over dyadic length shells at p = 4")
                        .arg(one("rank", "number of generators"))
                        .arg(one("shells", "number of shells (lengths 1, 2, 4, ..)"))
                        .arg(one("terms", "terms per shell")),
                ),
        )
        .subcommand(
            Command::new("qfock")
                .about("q-deformed Fock space")
                .subcommand_required(true)
                .subcommand(
                    Command::new("gram")
                        .about("Smallest eigenvalue of the q-Gram blocks")
                        .arg(many("n", "tensor levels"))
                        .arg(many("d", "one-particle dimensions"))
                        .arg(many("q", "deformation parameters")),
                )
                .subcommand(
                    Command::new("moments")
                        .about("Second and fourth vacuum moments of a q-Gaussian")
                        .arg(one("d", "one-particle dimension"))
                        .arg(many("q", "deformation parameters"))
                        .arg(one("level", "truncation level")),
                )
                .subcommand(
                    Command::new("ou")
                        .about("Second quantization of exp(-t) on the truncated Fock space")
                        .arg(one("d", "one-particle dimension"))
                        .arg(many("q", "deformation parameters"))
                        .arg(one("level", "truncation level"))
                        .arg(many("t", "times")),
                ),
        )
        .subcommand(
            Command::new("clifford")
                .about("Spin systems")
                .subcommand_required(true)
                .subcommand(
                    Command::new("multiplier")
                        .about("Complete positivity of a radial multiplier")
                        .arg(one("n", "number of spins"))
                        .arg(one("weights", "m(0),..,m(n), comma separated")),
                )
                .subcommand(
                    Command::new("semigroup")
                        .about("Algebra relations and the heat semigroup")
                        .arg(many("n", "numbers of spins"))
                        .arg(many("t", "times")),
                ),
        )
        .subcommand(
            Command::new("martingale")
                .about("Matrix martingales on tensor towers")
                .subcommand_required(true)
                .subcommand(
                    Command::new("stein")
                        .about("Col-boundedness estimate of the conditional expectations")
                        .arg(one("factors", "number of tensor factors"))
                        .arg(one("restarts", "search restarts")),
                )
                .subcommand(
                    Command::new("cesaro")
                        .about("Cesàro square function of a single conditional expectation")
                        .arg(one("factors", "number of tensor factors"))
                        .arg(one("index", "level of the conditional expectation"))
                        .arg(one("mmax", "number of Cesàro indices")),
                ),
        )
}

fn sqfn_equiv(c: Command) -> Command {
    c.about("Square function norms and empirical equivalence constants")
        .arg(operator())
        .arg(many("fn", "function ids"))
        .arg(one("variant", "col, row or rad"))
}

fn rowcol_gap(c: Command) -> Command {
    c.about("Column against row square function for diag(2, 4, .., 2^n)").arg(many("n", "sizes"))
}

/// Leaf subcommand path and its matches.
pub fn leaf(m: &clap::ArgMatches) -> (Vec<String>, &clap::ArgMatches) {
    let mut path = Vec::new();
    let mut cur = m;
    while let Some((name, sub)) = cur.subcommand() {
        path.push(name.to_string());
        cur = sub;
    }
    (path, cur)
}

/// Option names accepted by the leaf command, globals included.
pub fn known_keys(path: &[String]) -> Vec<String> {
    let root = command();
    let mut keys: Vec<String> = root.get_arguments().map(|a| a.get_id().to_string()).collect();
    let mut cur = &root;
    for name in path {
        match cur.find_subcommand(name) {
            Some(c) => cur = c,
            None => break,
        }
    }
    keys.extend(cur.get_arguments().map(|a| a.get_id().to_string()));
    keys
}
