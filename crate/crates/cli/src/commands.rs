use std::fs;

use chandisc::channel::{ChannelSpec, ChoiOperator};
use chandisc::conic::SolveOptions;
use chandisc::cost::{ent_cost_ppt, CostOptions, CostReport};
use chandisc::discrimination::{check_k, composite_psucc, psucc_global_pair, psucc_ppt_k, ParamChannelSet};
use chandisc::exec::ExecMode;
use chandisc::experiments::{default_gamma_grid, fig5, Fig5Row};
use chandisc::symmetry::{lp_bipartite_depol, lp_depol_swap, lp_pp_depol};
use chandisc::{Error, Result};

use crate::format::{json_opt, sig9};
use crate::{Cli, Command, Format, LpFamily, PairArgs};

fn solve_options(cli: &Cli) -> SolveOptions {
    let mut o = SolveOptions::default();
    if let Some(n) = cli.max_iter {
        o.max_iter = n;
    }
    o.exec = if cli.sequential { ExecMode::Sequential } else { ExecMode::Parallel };
    o
}

fn load(inline: &Option<String>, file: &Option<String>, which: &str) -> Result<ChoiOperator> {
    let spec = match (file, inline) {
        (Some(path), _) => ChannelSpec::from_json(&fs::read_to_string(path)?)?,
        (None, Some(text)) => ChannelSpec::parse_inline(text)?,
        (None, None) => return Err(Error::Parse(format!("missing channel --{which} or --{which}-file"))),
    };
    spec.build()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    Ok(())
}

fn pair(p: &PairArgs) -> Result<(ChoiOperator, ChoiOperator)> {
    check_lambda(p.lambda)?;
    Ok((load(&p.a, &p.a_file, "a")?, load(&p.b, &p.b_file, "b")?))
}

fn scalar(format: Format, command: &str, value: f64) -> String {
    match format {
        Format::Json => format!("{{\"command\":\"{command}\",\"value\":{}}}", sig9(value)),
        Format::Csv => format!("value\n{}", sig9(value)),
    }
}

fn report_text(r: &CostReport, format: Format) -> String {
    match format {
        Format::Json => {
            let rows: Vec<String> = r
                .per_k
                .iter()
                .map(|e| format!("{{\"k\":{},\"value\":{},\"gap\":{}}}", e.k, sig9(e.value), sig9(e.gap)))
                .collect();
            format!(
                "{{\"global_value\":{},\"per_k\":[{}],\"k_star\":{},\"cost_bits\":{},\"k_max_used\":{},\"eq_tol\":{}}}",
                sig9(r.global_value),
                rows.join(","),
                r.k_star.map_or("null".into(), |k| k.to_string()),
                json_opt(r.cost_bits),
                r.k_max_used,
                sig9(r.eq_tol)
            )
        }
        Format::Csv => {
            let mut s = String::from("k,value,gap");
            for e in &r.per_k {
                s.push_str(&format!("\n{},{},{}", e.k, sig9(e.value), sig9(e.gap)));
            }
            s
        }
    }
}

fn fig5_text(rows: &[Fig5Row], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut s = String::from("gamma,P_global,P_k1,P_k2");
            for r in rows {
                s.push_str(&format!("\n{},{},{},{}", sig9(r.gamma), sig9(r.p_global), sig9(r.p_k1), sig9(r.p_k2)));
            }
            s
        }
        Format::Json => {
            let items: Vec<String> = rows
                .iter()
                .map(|r| {
                    format!(
                        "{{\"gamma\":{},\"P_global\":{},\"P_k1\":{},\"P_k2\":{}}}",
                        sig9(r.gamma),
                        sig9(r.p_global),
                        sig9(r.p_k1),
                        sig9(r.p_k2)
                    )
                })
                .collect();
            format!("[{}]", items.join(","))
        }
    }
}

fn emit(text: String, out: &Option<String>) -> Result<String> {
    match out {
        Some(path) => {
            fs::write(path, format!("{text}\n"))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

pub fn run(cli: &Cli) -> Result<String> {
    let opts = solve_options(cli);
    let scalar_fmt = cli.format.unwrap_or(Format::Json);
    match &cli.command {
        Command::Global(p) => {
            let (n, m) = pair(p)?;
            Ok(scalar(scalar_fmt, "global", psucc_global_pair(&n, &m, p.lambda, &opts)?))
        }
        Command::Psucc { pair: p, k } => {
            check_k(*k)?;
            let (n, m) = pair(p)?;
            Ok(scalar(scalar_fmt, "psucc", psucc_ppt_k(&n, &m, p.lambda, *k, &opts)?.value))
        }
        Command::Entcost { pair: p, eq_tol, k_max, out } => {
            let (n, m) = pair(p)?;
            let co = CostOptions { eq_tol: *eq_tol, k_max: *k_max, solve: opts, ..CostOptions::default() };
            let report = ent_cost_ppt(&n, &m, p.lambda, &co)?;
            emit(report_text(&report, scalar_fmt), out)
        }
        Command::Lp { family, d, db, p, q, k } => {
            let sol = match family {
                LpFamily::Bipartite => lp_bipartite_depol(*d, db.unwrap_or(*d), *p, *q, *k, &opts)?,
                LpFamily::Pp => lp_pp_depol(*d, *p, *q, *k, &opts)?,
                LpFamily::Swap => lp_depol_swap(*d, *p, *q, *k, &opts)?,
            };
            Ok(scalar(scalar_fmt, "lp", sol.value))
        }
        Command::Composite { a, b, lambda, k } => {
            check_k(*k)?;
            check_lambda(*lambda)?;
            let build = |specs: &[String]| -> Result<Vec<ChoiOperator>> {
                specs.iter().map(|s| ChannelSpec::parse_inline(s)?.build()).collect()
            };
            let (sa, sb) = (build(a)?, build(b)?);
            let set = |cs: &[ChoiOperator]| {
                if cs.len() == 1 {
                    Ok(ParamChannelSet::singleton(&cs[0]))
                } else {
                    ParamChannelSet::hull(cs)
                }
            };
            let v = composite_psucc(&set(&sa)?, &set(&sb)?, &sa[0], *lambda, *k, &opts)?;
            Ok(scalar(scalar_fmt, "composite", v))
        }
        Command::Fig5 { copies, gammas, out } => {
            let grid = gammas.clone().unwrap_or_else(default_gamma_grid);
            let rows = fig5(&grid, *copies, &opts)?;
            emit(fig5_text(&rows, cli.format.unwrap_or(Format::Csv)), out)
        }
    }
}
