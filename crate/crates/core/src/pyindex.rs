//! The PyIndex code-indexing benchmark.
//!
//! Each case is a two-line Python snippet: a list literal `xs = [...]` and a
//! single indexing expression. Gold answers come from [`evaluate`], a
//! deterministic interpreter for the expression subset, so every case is
//! machine-checkable. Five subcategories cover forward indexing, backward
//! (negative) indexing, nested indexing, arithmetic index expressions, and
//! chained retrieval through slices, `sorted`, or `reversed`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{lanes, substream, Stream};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PyIndexError {
    #[error("index {index} out of range for list of length {length}")]
    IndexOutOfRange { index: i64, length: usize },
    #[error("value {0} not found in list")]
    ValueNotFound(i64),
    #[error("modulo by zero")]
    DivisionByZero,
    #[error("expression outside the supported grammar: {0}")]
    UnsupportedNode(String),
    #[error("generation retry budget exhausted for {0:?}")]
    GenerationExhausted(PyIndexCategory),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PyIndexCategory {
    Forward,
    Backward,
    Nested,
    Expression,
    Chained,
}

impl PyIndexCategory {
    pub const ALL: [PyIndexCategory; 5] = [
        PyIndexCategory::Forward,
        PyIndexCategory::Backward,
        PyIndexCategory::Nested,
        PyIndexCategory::Expression,
        PyIndexCategory::Chained,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            PyIndexCategory::Forward => "forward",
            PyIndexCategory::Backward => "backward",
            PyIndexCategory::Nested => "nested",
            PyIndexCategory::Expression => "expression",
            PyIndexCategory::Chained => "chained",
        }
    }

    pub fn parse(label: &str) -> Option<PyIndexCategory> {
        PyIndexCategory::ALL
            .iter()
            .copied()
            .find(|c| c.label() == label)
    }
}

/// Abstract syntax for the expression subset.
///
/// `List` stands for the single list literal `xs`; list-valued nodes may
/// only appear beneath a subscript or `index` call, never as the result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PyExpr {
    /// The list literal `xs`.
    List,
    Int(i64),
    Neg(Box<PyExpr>),
    Add(Box<PyExpr>, Box<PyExpr>),
    Sub(Box<PyExpr>, Box<PyExpr>),
    Mod(Box<PyExpr>, Box<PyExpr>),
    /// `len(xs)`.
    Len(Box<PyExpr>),
    /// `e1[e2]`.
    Subscript(Box<PyExpr>, Box<PyExpr>),
    /// `xs[a:b]` with literal bounds.
    Slice(Box<PyExpr>, i64, i64),
    /// `xs.index(v)`.
    IndexOf(Box<PyExpr>, i64),
    /// `sorted(xs)`.
    Sorted(Box<PyExpr>),
    /// `list(reversed(xs))`.
    Reversed(Box<PyExpr>),
}

/// A value during evaluation: the grammar only ever produces integers and
/// integer lists.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Value {
    Int(i64),
    List(Vec<i64>),
}

/// Evaluates an expression against the list `xs` under Python semantics:
/// 0-based subscripts with negative indices counting from the end, half-open
/// slices with clamping, `index` returning the first occurrence, `sorted`
/// ascending, and `%` as the non-negative remainder for non-negative
/// operands. The result must be an integer.
pub fn evaluate(expr: &PyExpr, xs: &[i64]) -> Result<i64, PyIndexError> {
    match eval_value(expr, xs)? {
        Value::Int(v) => Ok(v),
        Value::List(_) => Err(PyIndexError::UnsupportedNode(
            "expression evaluates to a list, not an integer".into(),
        )),
    }
}

fn eval_value(expr: &PyExpr, xs: &[i64]) -> Result<Value, PyIndexError> {
    match expr {
        PyExpr::List => Ok(Value::List(xs.to_vec())),
        PyExpr::Int(v) => Ok(Value::Int(*v)),
        PyExpr::Neg(inner) => Ok(Value::Int(-eval_int(inner, xs)?)),
        PyExpr::Add(a, b) => Ok(Value::Int(eval_int(a, xs)? + eval_int(b, xs)?)),
        PyExpr::Sub(a, b) => Ok(Value::Int(eval_int(a, xs)? - eval_int(b, xs)?)),
        PyExpr::Mod(a, b) => {
            let lhs = eval_int(a, xs)?;
            let rhs = eval_int(b, xs)?;
            if rhs == 0 {
                return Err(PyIndexError::DivisionByZero);
            }
            Ok(Value::Int(lhs.rem_euclid(rhs)))
        }
        PyExpr::Len(inner) => Ok(Value::Int(eval_list(inner, xs)?.len() as i64)),
        PyExpr::Subscript(base, index) => {
            let list = eval_list(base, xs)?;
            let raw = eval_int(index, xs)?;
            let len = list.len();
            let resolved = if raw < 0 { raw + len as i64 } else { raw };
            if resolved < 0 || resolved >= len as i64 {
                return Err(PyIndexError::IndexOutOfRange {
                    index: raw,
                    length: len,
                });
            }
            Ok(Value::Int(list[resolved as usize]))
        }
        PyExpr::Slice(base, a, b) => {
            let list = eval_list(base, xs)?;
            let len = list.len() as i64;
            let clamp = |bound: i64| -> usize {
                let resolved = if bound < 0 { bound + len } else { bound };
                resolved.clamp(0, len) as usize
            };
            let (start, stop) = (clamp(*a), clamp(*b));
            let slice = if start < stop {
                list[start..stop].to_vec()
            } else {
                Vec::new()
            };
            Ok(Value::List(slice))
        }
        PyExpr::IndexOf(base, v) => {
            let list = eval_list(base, xs)?;
            list.iter()
                .position(|x| x == v)
                .map(|p| Value::Int(p as i64))
                .ok_or(PyIndexError::ValueNotFound(*v))
        }
        PyExpr::Sorted(inner) => {
            let mut list = eval_list(inner, xs)?;
            list.sort_unstable();
            Ok(Value::List(list))
        }
        PyExpr::Reversed(inner) => {
            let mut list = eval_list(inner, xs)?;
            list.reverse();
            Ok(Value::List(list))
        }
    }
}

fn eval_int(expr: &PyExpr, xs: &[i64]) -> Result<i64, PyIndexError> {
    match eval_value(expr, xs)? {
        Value::Int(v) => Ok(v),
        Value::List(_) => Err(PyIndexError::UnsupportedNode(
            "expected an integer operand, found a list".into(),
        )),
    }
}

fn eval_list(expr: &PyExpr, xs: &[i64]) -> Result<Vec<i64>, PyIndexError> {
    match eval_value(expr, xs)? {
        Value::List(v) => Ok(v),
        Value::Int(_) => Err(PyIndexError::UnsupportedNode(
            "expected a list operand, found an integer".into(),
        )),
    }
}

/// Renders an expression in Python surface syntax.
pub fn render_expr(expr: &PyExpr) -> String {
    match expr {
        PyExpr::List => "xs".to_string(),
        PyExpr::Int(v) => v.to_string(),
        PyExpr::Neg(inner) => format!("-{}", render_expr(inner)),
        PyExpr::Add(a, b) => format!("{} + {}", render_expr(a), render_expr(b)),
        PyExpr::Sub(a, b) => format!("{} - {}", render_expr(a), render_expr(b)),
        PyExpr::Mod(a, b) => format!("{} % {}", render_expr(a), render_expr(b)),
        PyExpr::Len(inner) => format!("len({})", render_expr(inner)),
        PyExpr::Subscript(base, index) => {
            format!("{}[{}]", render_expr(base), render_expr(index))
        }
        PyExpr::Slice(base, a, b) => format!("{}[{}:{}]", render_expr(base), a, b),
        PyExpr::IndexOf(base, v) => format!("{}.index({})", render_expr(base), v),
        PyExpr::Sorted(inner) => format!("sorted({})", render_expr(inner)),
        PyExpr::Reversed(inner) => format!("list(reversed({}))", render_expr(inner)),
    }
}

/// A generated benchmark case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PyIndexCase {
    pub category: PyIndexCategory,
    /// The two-line snippet: `xs = [...]` then the expression.
    pub source_text: String,
    /// The list literal values.
    pub values: Vec<i64>,
    pub gold: i64,
    pub case_id: String,
    pub seed: u64,
    pub case_index: u32,
}

const LIST_LEN_RANGE: std::ops::RangeInclusive<usize> = 5..=12;
const VALUE_RANGE: std::ops::RangeInclusive<i64> = 0..=99;
const RETRY_BUDGET: usize = 1000;

/// Generates one case for a category from a deterministic stream.
pub fn generate_case(
    category: PyIndexCategory,
    stream: &mut Stream,
) -> Result<PyIndexCase, PyIndexError> {
    for _ in 0..RETRY_BUDGET {
        let length = stream.random_range(LIST_LEN_RANGE);
        let values: Vec<i64> = match category {
            // Every element must itself be a valid index.
            PyIndexCategory::Nested => (0..length)
                .map(|_| stream.random_range(0..length as i64))
                .collect(),
            _ => (0..length)
                .map(|_| stream.random_range(VALUE_RANGE))
                .collect(),
        };
        let expr = draw_expr(category, &values, stream);
        let Ok(gold) = evaluate(&expr, &values) else {
            continue;
        };
        let source_text = format!(
            "xs = [{}]\n{}",
            values
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(", "),
            render_expr(&expr)
        );
        return Ok(PyIndexCase {
            category,
            source_text,
            values,
            gold,
            case_id: String::new(),
            seed: 0,
            case_index: 0,
        });
    }
    Err(PyIndexError::GenerationExhausted(category))
}

fn draw_expr(category: PyIndexCategory, values: &[i64], stream: &mut Stream) -> PyExpr {
    let len = values.len() as i64;
    let xs = Box::new(PyExpr::List);
    match category {
        PyIndexCategory::Forward => {
            let k = stream.random_range(0..len);
            PyExpr::Subscript(xs, Box::new(PyExpr::Int(k)))
        }
        PyIndexCategory::Backward => {
            let k = stream.random_range(1..=len);
            PyExpr::Subscript(xs, Box::new(PyExpr::Neg(Box::new(PyExpr::Int(k)))))
        }
        PyIndexCategory::Nested => {
            let k = stream.random_range(0..len);
            PyExpr::Subscript(
                xs.clone(),
                Box::new(PyExpr::Subscript(xs, Box::new(PyExpr::Int(k)))),
            )
        }
        PyIndexCategory::Expression => match stream.random_range(0..4u8) {
            0 => {
                // xs[a + b] with a + b in range
                let target = stream.random_range(0..len);
                let a = stream.random_range(0..=target);
                PyExpr::Subscript(
                    xs,
                    Box::new(PyExpr::Add(
                        Box::new(PyExpr::Int(a)),
                        Box::new(PyExpr::Int(target - a)),
                    )),
                )
            }
            1 => {
                // xs[len(xs) - k] with 1 <= k <= len
                let k = stream.random_range(1..=len);
                PyExpr::Subscript(
                    xs.clone(),
                    Box::new(PyExpr::Sub(
                        Box::new(PyExpr::Len(xs)),
                        Box::new(PyExpr::Int(k)),
                    )),
                )
            }
            2 => {
                // xs[a % len(xs)]
                let a = stream.random_range(0..3 * len);
                PyExpr::Subscript(
                    xs.clone(),
                    Box::new(PyExpr::Mod(
                        Box::new(PyExpr::Int(a)),
                        Box::new(PyExpr::Len(xs)),
                    )),
                )
            }
            _ => {
                // xs.index(v): needs distinct values for a unique answer,
                // so the retry loop rejects lists with duplicates.
                let position = stream.random_range(0..values.len());
                PyExpr::IndexOf(xs, values[position])
            }
        },
        PyIndexCategory::Chained => match stream.random_range(0..3u8) {
            0 => {
                // xs[a:b][i] with 0 <= a < b <= len, 0 <= i < b - a
                let a = stream.random_range(0..len);
                let b = stream.random_range(a + 1..=len);
                let i = stream.random_range(0..b - a);
                PyExpr::Subscript(
                    Box::new(PyExpr::Slice(xs, a, b)),
                    Box::new(PyExpr::Int(i)),
                )
            }
            1 => {
                let k = stream.random_range(0..len);
                PyExpr::Subscript(Box::new(PyExpr::Sorted(xs)), Box::new(PyExpr::Int(k)))
            }
            _ => {
                let i = stream.random_range(0..len);
                PyExpr::Subscript(Box::new(PyExpr::Reversed(xs)), Box::new(PyExpr::Int(i)))
            }
        },
    }
}

/// Extra validity constraints the retry loop enforces beyond evaluability.
fn case_is_acceptable(case: &PyIndexCase) -> bool {
    match case.category {
        // index(v) must be unambiguous: reject duplicate values.
        PyIndexCategory::Expression if case.source_text.contains(".index(") => {
            let mut seen = std::collections::HashSet::new();
            case.values.iter().all(|v| seen.insert(*v))
        }
        _ => true,
    }
}

/// Generates the held-out benchmark: `per_category` cases for each of the
/// five categories, deterministic under `seed`, with no duplicate snippets.
pub fn generate_benchmark(
    seed: u64,
    per_category: u32,
) -> Result<Vec<PyIndexCase>, PyIndexError> {
    let mut cases = Vec::with_capacity(per_category as usize * 5);
    let mut seen_sources = std::collections::HashSet::new();
    for (cat_index, category) in PyIndexCategory::ALL.iter().enumerate() {
        for case_index in 0..per_category {
            let mut stream = substream(
                seed,
                lanes::PYINDEX,
                cat_index as u64,
                case_index as u64,
            );
            let mut case = loop {
                let candidate = generate_case(*category, &mut stream)?;
                if case_is_acceptable(&candidate) && seen_sources.insert(candidate.source_text.clone())
                {
                    break candidate;
                }
            };
            case.case_id = format!("{}-{:03}", category.label(), case_index);
            case.seed = seed;
            case.case_index = case_index;
            cases.push(case);
        }
    }
    Ok(cases)
}

/// Renders the benchmark into few-shot prompts. Demo cases are drawn from a
/// separate demo lane, category-matched, and never collide with any
/// benchmark snippet.
pub fn render_benchmark_prompts(
    cases: &[PyIndexCase],
    seed: u64,
) -> Result<Vec<crate::prompting::PromptInstance>, PyIndexError> {
    let benchmark_sources: std::collections::HashSet<&str> =
        cases.iter().map(|c| c.source_text.as_str()).collect();
    cases
        .iter()
        .enumerate()
        .map(|(i, case)| {
            let mut demos = Vec::with_capacity(3);
            let mut demo_sources = std::collections::HashSet::new();
            for slot in 0..3u64 {
                let mut stream = substream(seed, lanes::DEMOS ^ lanes::PYINDEX, i as u64, slot);
                let demo = loop {
                    let candidate = generate_case(case.category, &mut stream)?;
                    if case_is_acceptable(&candidate)
                        && !benchmark_sources.contains(candidate.source_text.as_str())
                        && demo_sources.insert(candidate.source_text.clone())
                    {
                        break candidate;
                    }
                };
                demos.push(demo);
            }
            Ok(crate::prompting::render_pyindex_prompt(case, &demos))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{lanes, substream};

    fn sub(base: PyExpr, idx: PyExpr) -> PyExpr {
        PyExpr::Subscript(Box::new(base), Box::new(idx))
    }

    #[test]
    fn first_element() {
        let expr = sub(PyExpr::List, PyExpr::Int(0));
        assert_eq!(evaluate(&expr, &[3, 1, 2]), Ok(3));
    }

    #[test]
    fn nested_subscript_follows_the_element() {
        // xs = [2, 9, 7]; xs[xs[0]] = xs[2] = 7
        let expr = sub(PyExpr::List, sub(PyExpr::List, PyExpr::Int(0)));
        assert_eq!(evaluate(&expr, &[2, 9, 7]), Ok(7));
    }

    #[test]
    fn sorted_then_subscript() {
        // sorted([5, 2, 9]) = [2, 5, 9]; [1] = 5
        let expr = sub(PyExpr::Sorted(Box::new(PyExpr::List)), PyExpr::Int(1));
        assert_eq!(evaluate(&expr, &[5, 2, 9]), Ok(5));
    }

    #[test]
    fn negative_index_counts_from_the_end() {
        let expr = sub(PyExpr::List, PyExpr::Neg(Box::new(PyExpr::Int(1))));
        assert_eq!(evaluate(&expr, &[4, 5, 6]), Ok(6));
        let expr = sub(PyExpr::List, PyExpr::Neg(Box::new(PyExpr::Int(3))));
        assert_eq!(evaluate(&expr, &[4, 5, 6]), Ok(4));
    }

    #[test]
    fn out_of_range_subscript_errors() {
        let expr = sub(PyExpr::List, PyExpr::Int(3));
        assert_eq!(
            evaluate(&expr, &[1, 2, 3]),
            Err(PyIndexError::IndexOutOfRange {
                index: 3,
                length: 3
            })
        );
        let expr = sub(PyExpr::List, PyExpr::Neg(Box::new(PyExpr::Int(4))));
        assert!(matches!(
            evaluate(&expr, &[1, 2, 3]),
            Err(PyIndexError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn slices_clamp_like_python() {
        // xs[1:9] on a 3-list is xs[1:3]
        let expr = sub(PyExpr::Slice(Box::new(PyExpr::List), 1, 9), PyExpr::Int(1));
        assert_eq!(evaluate(&expr, &[7, 8, 9]), Ok(9));
        // negative bounds resolve from the end: xs[-2:3][0] == xs[1]
        let expr = sub(PyExpr::Slice(Box::new(PyExpr::List), -2, 3), PyExpr::Int(0));
        assert_eq!(evaluate(&expr, &[7, 8, 9]), Ok(8));
    }

    #[test]
    fn index_of_returns_first_occurrence() {
        let expr = PyExpr::IndexOf(Box::new(PyExpr::List), 9);
        assert_eq!(evaluate(&expr, &[7, 9, 9]), Ok(1));
        let expr = PyExpr::IndexOf(Box::new(PyExpr::List), 4);
        assert_eq!(evaluate(&expr, &[7, 9]), Err(PyIndexError::ValueNotFound(4)));
    }

    #[test]
    fn modulo_is_non_negative() {
        let expr = PyExpr::Mod(Box::new(PyExpr::Int(7)), Box::new(PyExpr::Int(3)));
        match eval_value(&expr, &[]).unwrap() {
            Value::Int(v) => assert_eq!(v, 1),
            _ => panic!(),
        }
        let expr = PyExpr::Mod(Box::new(PyExpr::Int(7)), Box::new(PyExpr::Int(0)));
        assert_eq!(eval_value(&expr, &[]), Err(PyIndexError::DivisionByZero));
    }

    #[test]
    fn list_valued_result_is_rejected() {
        assert_eq!(
            evaluate(&PyExpr::Sorted(Box::new(PyExpr::List)), &[2, 1]),
            Err(PyIndexError::UnsupportedNode(
                "expression evaluates to a list, not an integer".into()
            ))
        );
    }

    #[test]
    fn rendering_is_python_surface_syntax() {
        let expr = sub(PyExpr::Reversed(Box::new(PyExpr::List)), PyExpr::Int(2));
        assert_eq!(render_expr(&expr), "list(reversed(xs))[2]");
        let expr = sub(
            PyExpr::List,
            PyExpr::Mod(Box::new(PyExpr::Int(7)), Box::new(PyExpr::Len(Box::new(PyExpr::List)))),
        );
        assert_eq!(render_expr(&expr), "xs[7 % len(xs)]");
    }

    #[test]
    fn generated_categories_have_the_documented_shapes() {
        for (i, category) in PyIndexCategory::ALL.iter().enumerate() {
            for j in 0..50u64 {
                let mut stream = substream(5, lanes::PYINDEX, i as u64 + 100, j);
                let case = generate_case(*category, &mut stream).unwrap();
                let expression = case.source_text.lines().nth(1).unwrap();
                match category {
                    PyIndexCategory::Forward => {
                        assert!(
                            expression.starts_with("xs[") && !expression.contains('-'),
                            "{expression}"
                        );
                    }
                    PyIndexCategory::Backward => {
                        assert!(expression.starts_with("xs[-"), "{expression}");
                    }
                    PyIndexCategory::Nested => {
                        assert!(expression.starts_with("xs[xs["), "{expression}");
                        assert!(case.values.iter().all(|&v| v >= 0
                            && (v as usize) < case.values.len()));
                    }
                    PyIndexCategory::Expression => {
                        assert!(
                            expression.contains('+')
                                || expression.contains("len(xs) -")
                                || expression.contains('%')
                                || expression.contains(".index("),
                            "{expression}"
                        );
                    }
                    PyIndexCategory::Chained => {
                        assert!(
                            expression.contains(':')
                                || expression.starts_with("sorted(")
                                || expression.starts_with("list(reversed("),
                            "{expression}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn benchmark_is_deterministic_and_complete() {
        let a = generate_benchmark(42, 20).unwrap();
        let b = generate_benchmark(42, 20).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        for category in PyIndexCategory::ALL {
            assert_eq!(a.iter().filter(|c| c.category == category).count(), 20);
        }
        let sources: std::collections::HashSet<&str> =
            a.iter().map(|c| c.source_text.as_str()).collect();
        assert_eq!(sources.len(), 100, "duplicate snippets in the benchmark");
    }

    #[test]
    fn benchmark_golds_are_closed_over_the_list() {
        // Forward/Backward/Nested/Chained answers are elements of xs;
        // index(v) answers are positions.
        let cases = generate_benchmark(7, 20).unwrap();
        for case in &cases {
            let is_index_call = case.source_text.contains(".index(");
            if is_index_call {
                assert!((0..case.values.len() as i64).contains(&case.gold));
            } else if case.category != PyIndexCategory::Expression {
                assert!(
                    case.values.contains(&case.gold),
                    "{}: gold {} not in {:?}",
                    case.case_id,
                    case.gold,
                    case.values
                );
            }
        }
    }

    #[test]
    fn prompts_are_three_shot_and_category_matched() {
        let cases = generate_benchmark(3, 2).unwrap();
        let prompts = render_benchmark_prompts(&cases, 3).unwrap();
        assert_eq!(prompts.len(), cases.len());
        for (case, prompt) in cases.iter().zip(&prompts) {
            assert_eq!(prompt.messages.len(), 7);
            let crate::prompting::PromptPayload::PyIndex { demos, .. } = &prompt.payload else {
                panic!("pyindex payload expected");
            };
            for demo in demos {
                assert_eq!(demo.category, case.category);
                assert_ne!(demo.source_text, case.source_text);
            }
            assert!(prompt.test_turn().contains(&case.source_text));
        }
    }
}
