use serde::Serialize;

use segmental_core::bayes::{arr_curve, posterior_curve, ArrPoint, Grid, PosteriorCurve, PriorEstimate};
use segmental_core::irma2;
use segmental_core::likelihood::OutcomeModel;

use crate::fail::{CliError, GRID_PRIOR};
use crate::input::{parse_list, read_json};
use crate::output::{emit, fmt3, table, to_json, OutDir};
use crate::svg::{Chart, Series};
use crate::{CurvesArgs, Format};

#[derive(Serialize)]
struct ArrSummary {
    treatment: String,
    max_arr: f64,
    at: f64,
}

#[derive(Serialize)]
struct CurvesOutput<'a> {
    grid: Grid,
    curves: &'a [PosteriorCurve],
    observed: &'a [PosteriorCurve],
    arr: Vec<ArrSummary>,
    odds_ratio: Vec<(String, f64)>,
}

/// File-name stem for a group label.
fn slug(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

fn curve_csv(c: &PosteriorCurve) -> String {
    let mut s = String::from("aer,probability\n");
    for p in &c.points {
        s.push_str(&format!("{},{}\n", p.value, p.probability));
    }
    s
}

fn arr_csv(points: &[ArrPoint]) -> String {
    let mut s = String::from("aer,arr\n");
    for p in points {
        s.push_str(&format!("{},{}\n", p.value, p.arr));
    }
    s
}

fn max_arr(points: &[ArrPoint]) -> (f64, f64) {
    points.iter().fold((f64::NAN, f64::NEG_INFINITY), |(at, m), p| if p.arr > m { (p.value, p.arr) } else { (at, m) })
}

fn xy(c: &PosteriorCurve) -> Vec<(f64, f64)> {
    c.points.iter().map(|p| (p.value, p.probability)).collect()
}

pub fn run(args: &CurvesArgs) -> Result<(), CliError> {
    let mut inputs = vec![args.priors.display().to_string()];
    let model: OutcomeModel = match &args.model {
        Some(p) => {
            inputs.push(p.display().to_string());
            read_json(p)?
        }
        None => irma2::published_segmental_model(),
    };
    let priors: Vec<PriorEstimate> = read_json(&args.priors)?;
    let v = parse_list("grid", &args.grid, 3).map_err(|e| CliError::new(GRID_PRIOR, e.message))?;
    let grid = Grid::new(v[0], v[1], v[2])?;

    let control = priors
        .iter()
        .find(|p| p.control)
        .ok_or_else(|| CliError::new(GRID_PRIOR, "priors file has no control prior"))?;
    let others: Vec<&PriorEstimate> = priors.iter().filter(|p| !p.control).collect();
    if others.is_empty() {
        return Err(CliError::new(GRID_PRIOR, "priors file needs a treatment prior besides the control"));
    }
    let ordered: Vec<&PriorEstimate> = std::iter::once(control).chain(others.iter().copied()).collect();

    let curves = ordered.iter().map(|p| posterior_curve(&model, p, &grid)).collect::<Result<Vec<_>, _>>()?;
    let observed = if args.no_observed {
        vec![]
    } else {
        ordered
            .iter()
            .filter_map(|p| p.observed.map(|c| PriorEstimate::from_observed(&p.group, p.control, c)))
            .map(|p| p.and_then(|p| posterior_curve(&model, &p, &grid)))
            .collect::<Result<Vec<_>, _>>()?
    };

    let mut dir = OutDir::new(Some(&args.out))?;
    let mut arr = vec![];
    let mut odds_ratio = vec![];
    let mut first_arr: Option<Vec<ArrPoint>> = None;
    for c in &curves {
        dir.write(&format!("posterior_{}.csv", slug(&c.group)), &curve_csv(c))?;
    }
    for c in &observed {
        dir.write(&format!("posterior_{}_observed.csv", slug(&c.group)), &curve_csv(c))?;
    }
    for t in &curves[1..] {
        let points = arr_curve(&curves[0], t)?;
        let (at, m) = max_arr(&points);
        arr.push(ArrSummary { treatment: t.group.clone(), max_arr: m, at });
        odds_ratio.push((t.group.clone(), t.prior.prior_odds / curves[0].prior.prior_odds));
        if first_arr.is_none() {
            dir.write("arr.csv", &arr_csv(&points))?;
            first_arr = Some(points.clone());
        }
        dir.write(&format!("arr_{}.csv", slug(&t.group)), &arr_csv(&points))?;
    }
    let first_arr = first_arr.expect("at least one treatment curve");

    // the overlay shows the control and the first treatment group
    let mut series = vec![];
    for c in &curves[..2] {
        series.push(Series { label: c.group.clone(), points: xy(c), dashed: false });
        if let Some(o) = observed.iter().find(|o| o.group == c.group) {
            series.push(Series { label: format!("{} (full data)", c.group), points: xy(o), dashed: true });
        }
    }
    let posterior_svg = Chart {
        title: "Posterior probability of the outcome",
        x_label: "baseline test value (µg/min)",
        y_label: "probability",
        series,
        mark: None,
    }
    .render();
    let (at, m) = max_arr(&first_arr);
    let arr_svg = Chart {
        title: &format!("Absolute risk reduction, {} vs {}", curves[1].group, curves[0].group),
        x_label: "baseline test value (µg/min)",
        y_label: "probability",
        series: vec![Series {
            label: "ARR".into(),
            points: first_arr.iter().map(|p| (p.value, p.arr)).collect(),
            dashed: false,
        }],
        mark: Some((at, m, format!("max {m:.3} at {at}"))),
    }
    .render();
    dir.write("posterior.svg", &posterior_svg)?;
    dir.write("arr.svg", &arr_svg)?;

    let out = CurvesOutput { grid, curves: &curves, observed: &observed, arr, odds_ratio };
    dir.write("curves.json", &to_json(&out))?;
    match args.format {
        Format::Table | Format::Csv => {
            let headers = ["group", "prior_p", "p_at_lo", "p_at_hi", "max_arr", "at", "odds_ratio"];
            let rows: Vec<Vec<String>> = curves
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let first = c.points.first().map_or(f64::NAN, |p| p.probability);
                    let last = c.points.last().map_or(f64::NAN, |p| p.probability);
                    let (ma, at, or) = match i {
                        0 => ("-".to_string(), "-".to_string(), "-".to_string()),
                        _ => {
                            (fmt3(out.arr[i - 1].max_arr), out.arr[i - 1].at.to_string(), fmt3(out.odds_ratio[i - 1].1))
                        }
                    };
                    vec![c.group.clone(), fmt3(c.prior.prior_probability), fmt3(first), fmt3(last), ma, at, or]
                })
                .collect();
            if args.format == Format::Table {
                emit(&table(&headers, &rows));
            } else {
                emit(&crate::output::csv(&headers, &rows));
            }
        }
        Format::Json => emit(&to_json(&out)),
    }
    dir.finish("curves", &inputs, args, None)
}
