//! Command-line surface. Decision subcommands exit 0 for true and 1 for
//! false; every failure exits 2 with a JSON error object on stderr.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qcsplab", version, about = "finite-domain QCSP laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Step budget for enumerations and extension materialization.
    /// Accepts plain integers or scientific notation like 1e7.
    #[arg(long, global = true, default_value = "1e7", value_parser = parse_budget)]
    pub budget: u64,

    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write the structured report to this path.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    /// Worker threads for the verification sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

fn parse_budget(text: &str) -> Result<u64, String> {
    if let Ok(v) = text.parse::<u64>() {
        return Ok(v);
    }
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v <= u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("{text:?} is not a budget")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMode {
    Full,
    Pi2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PowersMode {
    Exact,
    Collapse,
    Switch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GadgetKind {
    Rho,
    RhoPrime,
    Sigma,
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmitKind {
    Dnf,
    Extension,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a sentence over a structure. Exit 0 = true, 1 = false.
    Solve {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = SolveMode::Full)]
        mode: SolveMode,
        /// Universe for the universal block in pi2 mode:
        /// switch:<k>, collapse:<k>, or file:<path>.
        #[arg(long)]
        universe: Option<String>,
        /// Record the witness or strategy table in the report.
        #[arg(long)]
        trace: bool,
    },
    /// Decide a sentence over the tau family of a cut by instantiating
    /// existential variables inside the intersection. Exit 0 = true, 1 = false.
    DecideTau {
        /// First block, comma-separated element names.
        #[arg(long)]
        alpha: String,
        /// Second block, comma-separated element names.
        #[arg(long)]
        beta: String,
        /// Domain element order; defaults to the sorted union of the blocks.
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Enumerate the polymorphisms of a structure at one arity.
    Pol {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        idempotent: bool,
    },
    /// Growth data for algebra powers: exact minimal generating sizes or
    /// collapse/switch seed-set verdicts.
    Powers {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long = "max-m")]
        max_m: usize,
        #[arg(long, value_enum, default_value_t = PowersMode::Exact)]
        mode: PowersMode,
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
    /// Build one of the cut gadget relations and print it.
    Gadget {
        /// Cut as alpha:beta, each a comma-separated list of names.
        #[arg(long)]
        cut: String,
        #[arg(long, value_enum)]
        kind: GadgetKind,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value_t = EmitKind::Dnf)]
        emit: EmitKind,
        /// Domain element order; defaults to the sorted names in the cut.
        #[arg(long)]
        domain: Option<String>,
    },
    /// Compile a not-all-equal instance into a universally quantified tau
    /// sentence plus its structure.
    ReduceNaesat {
        instance: PathBuf,
        #[arg(long)]
        cut: String,
        #[arg(long)]
        domain: Option<String>,
        /// Write the sentence here; the structure goes to <out>.structure.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare tau_k against the conjunction of its sigma_k instances.
    /// Exit 0 = extensionally equal, 1 = mismatch.
    CheckTauDef {
        #[arg(long)]
        cut: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        domain: Option<String>,
    },
    /// Build the canonical sentence of a structure against an adversary.
    Canonical {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        m: usize,
        /// full or switch:<k>.
        #[arg(long, default_value = "full")]
        adversary: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate canonical sentences of family truncations 1..=k-max.
    Compactness {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        family: String,
        #[arg(long = "k-max")]
        k_max: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value = "full")]
        adversary: String,
    },
    /// Sweep the satisfiability reduction: source and target verdicts must
    /// complement each other on every instance and cut.
    VerifyTheorem3 {
        /// Restrict to one cut instead of enumerating all of them.
        #[arg(long)]
        cut: Option<String>,
        #[arg(long = "domain-sizes", default_value = "3,4")]
        domain_sizes: String,
        #[arg(long = "max-vars", default_value_t = 3)]
        max_vars: usize,
        #[arg(long = "max-clauses", default_value_t = 2)]
        max_clauses: usize,
    },
    /// Sweep the instantiation procedure against plain evaluation over the
    /// tau family.
    VerifyProp1 {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long = "max-vars", default_value_t = 4)]
        max_vars: usize,
    },
    /// Check the near-unanimity construction and its tau preservation.
    VerifyProp2 {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long = "max-i", default_value_t = 2)]
        max_i: usize,
    },
    /// Check tau against its sigma-conjunction definition on all cuts.
    VerifyTaudef {
        #[arg(long = "max-n", default_value_t = 4)]
        max_n: usize,
        #[arg(long = "max-k", default_value_t = 2)]
        max_k: usize,
    },
    /// Exact generating sizes against the naive subset oracle on the stock
    /// algebras.
    VerifyPowersSanity {
        #[arg(long = "max-m", default_value_t = 3)]
        max_m: usize,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budgets_parse_both_ways() {
        assert_eq!(parse_budget("123").unwrap(), 123);
        assert_eq!(parse_budget("1e7").unwrap(), 10_000_000);
        assert!(parse_budget("wat").is_err());
        assert!(parse_budget("-5").is_err());
    }

    #[test]
    fn sample_invocations_parse() {
        for line in [
            "qcsplab pol --structure s.json --arity 2 --idempotent",
            "qcsplab powers --algebra a.json --max-m 4 --mode exact --k 2 --budget 1e7 --report out.json",
            "qcsplab solve --structure s.json --instance q.txt --mode pi2 --universe switch:1",
            "qcsplab decide-tau --alpha 0,1 --beta 1,2 --instance q.txt",
            "qcsplab gadget --cut 0,1:1,2 --kind tau --k 2 --emit dnf",
            "qcsplab reduce-naesat inst.nae --cut 0,1:1,2 --out q.txt",
            "qcsplab check-tau-def --cut 0,1:1,2 --k 2",
            "qcsplab canonical --structure s.json --m 1 --adversary full --out q.txt",
            "qcsplab compactness --structure s.json --family tau --k-max 2",
            "qcsplab verify-theorem3 --cut 0,1:1,2 --max-vars 3 --max-clauses 2",
            "qcsplab verify-prop1 --n 3 --max-vars 4",
            "qcsplab verify-prop2 --n 3 --max-i 2",
            "qcsplab verify-taudef --max-n 4 --max-k 2",
            "qcsplab verify-powers-sanity",
        ] {
            let args: Vec<&str> = line.split_whitespace().collect();
            Cli::try_parse_from(&args).unwrap_or_else(|e| panic!("{line}: {e}"));
        }
    }
}
