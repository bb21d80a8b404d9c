//! Seeded synthetic corpus generation.
//!
//! Produces an observation/prediction snapshot pair whose ground-truth
//! survival labels follow a planted logistic model over one feature
//! family, so end-to-end runs have a known answer. The same seed and
//! config always produce bit-identical snapshots.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::records::{
    BusinessRecord, CheckinRecord, PhotoRecord, ReviewRecord, Snapshot,
};
use crate::error::{Error, Result};
use crate::geo::{manifest, GridIndex, EARTH_RADIUS_M};
use crate::numeric::{logit, sigmoid};

/// Which feature family drives survival, and how strongly. `weight` is the
/// standard deviation of the planted score on the logit scale (features
/// are standardized before weighting).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlantedSignal {
    /// Survival is an independent coin flip at the base rate.
    None,
    /// Restaurants with fewer than `threshold` reviews have their death
    /// odds multiplied by `death_odds_multiplier`.
    ReviewCountOdds {
        threshold: u32,
        death_odds_multiplier: f64,
    },
    /// Score from standardized price range, trendy ambience, and free wifi.
    Attributes { weight: f64 },
    /// Score from the standardized count of businesses within 500 m.
    Geography { weight: f64 },
    /// Score from how evenly check-ins spread across hours of the day.
    Mobility { weight: f64 },
    /// Score from a latent sentiment tilt of the restaurant's review text.
    Linguistic { weight: f64 },
}

/// How review bodies are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReviewTextMode {
    /// All reviews draw from a shared neutral word pool.
    NeutralPool,
    /// Reviews mix in words from disjoint positive/negative pools chosen
    /// by the review's star polarity.
    SentimentPools,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub restaurants: usize,
    pub other_businesses: usize,
    pub users: usize,
    pub mean_reviews_per_restaurant: usize,
    pub mean_checkins_per_restaurant: usize,
    /// Center of the synthetic city, (latitude, longitude) degrees.
    pub center: (f64, f64),
    /// Side length of the square the businesses are scattered over.
    pub extent_m: f64,
    pub observation_end: NaiveDate,
    pub prediction_end: NaiveDate,
    pub base_survival_rate: f64,
    /// Fraction of restaurants already closed at observation end.
    pub closed_at_observation_rate: f64,
    /// Every nth dead restaurant is removed from the prediction snapshot
    /// entirely (0 disables delisting).
    pub delist_every_nth_dead: usize,
    pub signal: PlantedSignal,
    pub review_text: ReviewTextMode,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            restaurants: 500,
            other_businesses: 250,
            users: 200,
            mean_reviews_per_restaurant: 6,
            mean_checkins_per_restaurant: 10,
            center: (36.12, -115.17),
            extent_m: 4000.0,
            observation_end: NaiveDate::from_ymd_opt(2017, 12, 31).unwrap(),
            prediction_end: NaiveDate::from_ymd_opt(2019, 12, 31).unwrap(),
            base_survival_rate: 0.85,
            closed_at_observation_rate: 0.05,
            delist_every_nth_dead: 5,
            signal: PlantedSignal::None,
            review_text: ReviewTextMode::NeutralPool,
        }
    }
}

/// Ground truth for one synthetic restaurant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedOutcome {
    pub business_id: String,
    /// Planted logit-scale score.
    pub score: f64,
    pub survival_probability: f64,
    pub survived: bool,
    pub open_at_observation: bool,
    pub delisted: bool,
    pub review_count: u32,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub observation: Snapshot,
    pub prediction: Snapshot,
    pub truth: Vec<PlantedOutcome>,
}

struct RestaurantDraws {
    price: u8,
    ambience: [bool; 9],
    wifi: u8,   // 0 none, 1 free, 2 paid
    alcohol: u8, // 0 none, 1 beer_and_wine, 2 full_bar
    attire: u8, // 0 casual, 1 dressy, 2 formal
    flags: [bool; 8],
    review_count: u32,
    checkin_count: u32,
    /// Hour-spread parameter in [0, 1]; 1 = uniform across the day.
    hour_spread: f64,
    peak_hour: u32,
    /// Latent sentiment tilt for the linguistic plant.
    sentiment_latent: f64,
}

pub fn generate(config: &SynthConfig, seed: u64) -> Result<SyntheticCorpus> {
    validate(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let total = config.restaurants + config.other_businesses;
    let meters_per_lat = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
    let meters_per_lon = meters_per_lat * config.center.0.to_radians().cos();

    // 1. Positions for every business.
    let mut positions = Vec::with_capacity(total);
    for _ in 0..total {
        let dy = rng.random_range(-config.extent_m / 2.0..config.extent_m / 2.0);
        let dx = rng.random_range(-config.extent_m / 2.0..config.extent_m / 2.0);
        positions.push((
            config.center.0 + dy / meters_per_lat,
            config.center.1 + dx / meters_per_lon,
        ));
    }

    // 2. Categories.
    let cuisine_names = manifest::cuisines().names();
    let category_names = manifest::categories().names();
    let other_categories: Vec<&String> = category_names
        .iter()
        .filter(|c| c.as_str() != "Restaurants")
        .collect();
    let mut categories: Vec<Vec<String>> = Vec::with_capacity(total);
    for i in 0..total {
        if i < config.restaurants {
            let mut cats = vec!["Restaurants".to_string()];
            cats.push(cuisine_names[rng.random_range(0..cuisine_names.len())].clone());
            if rng.random_bool(0.3) {
                let second = cuisine_names[rng.random_range(0..cuisine_names.len())].clone();
                if !cats.contains(&second) {
                    cats.push(second);
                }
            }
            categories.push(cats);
        } else {
            let mut cats = vec![other_categories[rng.random_range(0..other_categories.len())]
                .to_string()];
            if rng.random_bool(0.3) {
                let second =
                    other_categories[rng.random_range(0..other_categories.len())].to_string();
                if !cats.contains(&second) {
                    cats.push(second);
                }
            }
            categories.push(cats);
        }
    }

    // 3. Per-restaurant draws.
    let attrs_planted = matches!(config.signal, PlantedSignal::Attributes { .. });
    let mean_reviews = config.mean_reviews_per_restaurant.max(1);
    let mut draws = Vec::with_capacity(config.restaurants);
    for _ in 0..config.restaurants {
        let mut ambience = [false; 9];
        for (slot, a) in ambience.iter_mut().enumerate() {
            let p = if slot == TRENDY_SLOT { 0.5 } else { 0.35 };
            *a = rng.random_bool(p);
        }
        let mut flags = [false; 8];
        for f in flags.iter_mut() {
            *f = rng.random_bool(0.5);
        }
        draws.push(RestaurantDraws {
            price: rng.random_range(1..=4),
            ambience,
            wifi: rng.random_range(0..3),
            alcohol: rng.random_range(0..3),
            attire: rng.random_range(0..3),
            flags,
            review_count: rng.random_range(1..=(2 * mean_reviews as u32 - 1)),
            checkin_count: rng.random_range(0..=(2 * config.mean_checkins_per_restaurant as u32)),
            hour_spread: rng.random_range(0.0..1.0),
            peak_hour: rng.random_range(0..24),
            sentiment_latent: rng.random_range(0.0..1.0),
        });
    }

    // 4. Planted scores.
    let scores = planted_scores(config, &positions, &draws);

    // 5. Survival outcomes.
    let base_logit = logit(config.base_survival_rate);
    let mut truth = Vec::with_capacity(config.restaurants);
    let mut dead_counter = 0usize;
    for (i, draw) in draws.iter().enumerate() {
        let p = sigmoid(base_logit + scores[i]);
        let survived = rng.random::<f64>() < p;
        let open_at_observation = rng.random::<f64>() >= config.closed_at_observation_rate;
        let delisted = if open_at_observation && !survived {
            dead_counter += 1;
            config.delist_every_nth_dead > 0 && dead_counter.is_multiple_of(config.delist_every_nth_dead)
        } else {
            false
        };
        truth.push(PlantedOutcome {
            business_id: business_id(i),
            score: scores[i],
            survival_probability: p,
            survived,
            open_at_observation,
            delisted,
            review_count: draw.review_count,
        });
    }

    // 6. Business records for the observation snapshot.
    let states = ["NV", "AZ", "PA", "NC", "OH"];
    let mut businesses = Vec::with_capacity(total);
    for i in 0..total {
        let (is_open, name, attributes, review_count) = if i < config.restaurants {
            let t = &truth[i];
            (
                t.open_at_observation,
                format!("Synthetic Restaurant {i}"),
                attribute_map(&draws[i], attrs_planted, &mut rng),
                draws[i].review_count,
            )
        } else {
            (
                rng.random_bool(0.9),
                format!("Synthetic Business {i}"),
                BTreeMap::new(),
                0,
            )
        };
        businesses.push(BusinessRecord {
            business_id: business_id(i),
            name,
            latitude: positions[i].0,
            longitude: positions[i].1,
            categories: categories[i].clone(),
            is_open,
            attributes,
            state: states[i % states.len()].to_string(),
            review_count,
        });
    }

    // 7. Reviews.
    let window_start = config.observation_end - Duration::days(3 * 365);
    let window_days = (config.observation_end - window_start).num_days();
    let mut reviews = Vec::new();
    let mut review_seq = 0usize;
    for (i, business) in businesses.iter().enumerate() {
        let count = if i < config.restaurants {
            draws[i].review_count
        } else {
            rng.random_range(0..=mean_reviews as u32)
        };
        for _ in 0..count {
            let user = rng.random_range(0..config.users);
            let day = rng.random_range(0..window_days);
            let secs = rng.random_range(0..86_400);
            let timestamp = (window_start + Duration::days(day))
                .and_hms_opt(0, 0, 0)
                .unwrap()
                + Duration::seconds(secs);
            let stars = rng.random_range(1..=5u8);
            let text = review_text(config, &mut rng, stars, i, &draws);
            reviews.push(ReviewRecord {
                review_id: format!("rv{review_seq:07}"),
                business_id: business.business_id.clone(),
                user_id: format!("u{user:05}"),
                stars,
                timestamp,
                text,
            });
            review_seq += 1;
        }
    }

    // 8. Check-ins. Non-restaurants get a smaller stream so neighborhood
    // temporal profiles are populated too.
    let checkin_window_days = 540i64;
    let checkin_start = config.observation_end - Duration::days(checkin_window_days);
    let mut checkins = Vec::new();
    for (i, business) in businesses.iter().enumerate() {
        let (count, spread, peak) = if i < config.restaurants {
            (
                draws[i].checkin_count,
                draws[i].hour_spread,
                draws[i].peak_hour,
            )
        } else {
            (
                rng.random_range(0..=(config.mean_checkins_per_restaurant as u32)),
                1.0,
                0,
            )
        };
        if count == 0 {
            continue;
        }
        let mut timestamps = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let day = rng.random_range(0..checkin_window_days);
            let hour = if matches!(config.signal, PlantedSignal::Mobility { .. })
                && i < config.restaurants
            {
                if rng.random::<f64>() < spread {
                    rng.random_range(0..24)
                } else {
                    peak
                }
            } else {
                rng.random_range(0..24)
            };
            let minute = rng.random_range(0..60);
            let ts = (checkin_start + Duration::days(day))
                .and_hms_opt(hour, minute, 0)
                .unwrap();
            timestamps.push(ts);
        }
        checkins.push(CheckinRecord {
            business_id: business.business_id.clone(),
            timestamps,
        });
    }

    // 9. Photos for restaurants.
    let mut photos = Vec::new();
    let mut photo_seq = 0usize;
    for business in businesses.iter().take(config.restaurants) {
        for _ in 0..rng.random_range(0..=8u32) {
            photos.push(PhotoRecord {
                photo_id: format!("ph{photo_seq:06}"),
                business_id: business.business_id.clone(),
            });
            photo_seq += 1;
        }
    }

    // 10. Prediction snapshot: survival outcomes applied, delisted
    // restaurants removed along with their records.
    let mut pred_businesses = Vec::with_capacity(total);
    for (i, b) in businesses.iter().enumerate() {
        if i < config.restaurants {
            let t = &truth[i];
            if t.delisted {
                continue;
            }
            let mut later = b.clone();
            later.is_open = t.open_at_observation && t.survived;
            pred_businesses.push(later);
        } else {
            pred_businesses.push(b.clone());
        }
    }
    let delisted_ids: Vec<&str> = truth
        .iter()
        .filter(|t| t.delisted)
        .map(|t| t.business_id.as_str())
        .collect();
    let keep = |id: &str| !delisted_ids.contains(&id);
    let pred_reviews = reviews
        .iter()
        .filter(|r| keep(&r.business_id))
        .cloned()
        .collect();
    let pred_checkins = checkins
        .iter()
        .filter(|c| keep(&c.business_id))
        .cloned()
        .collect();
    let pred_photos = photos
        .iter()
        .filter(|p| keep(&p.business_id))
        .cloned()
        .collect();

    let (observation, _) = Snapshot::new(
        config.observation_end,
        businesses,
        reviews,
        checkins,
        photos,
    )?;
    let (prediction, _) = Snapshot::new(
        config.prediction_end,
        pred_businesses,
        pred_reviews,
        pred_checkins,
        pred_photos,
    )?;
    Ok(SyntheticCorpus {
        observation,
        prediction,
        truth,
    })
}

fn validate(config: &SynthConfig) -> Result<()> {
    if config.restaurants == 0 {
        return Err(Error::InvalidConfig("synth.restaurants must be >= 1".into()));
    }
    if config.users == 0 {
        return Err(Error::InvalidConfig("synth.users must be >= 1".into()));
    }
    if !(config.base_survival_rate > 0.0 && config.base_survival_rate < 1.0) {
        return Err(Error::InvalidConfig(
            "synth.base_survival_rate must be in (0, 1)".into(),
        ));
    }
    if config.extent_m <= 0.0 {
        return Err(Error::InvalidConfig("synth.extent_m must be positive".into()));
    }
    if config.observation_end >= config.prediction_end {
        return Err(Error::InvalidConfig(
            "synth.observation_end must precede synth.prediction_end".into(),
        ));
    }
    Ok(())
}

fn business_id(i: usize) -> String {
    format!("bz{i:05}")
}

/// Ambience slot order used by the attribute map.
const AMBIENCE_KEYS: [&str; 9] = [
    "romantic", "intimate", "classy", "hipster", "divey", "touristy", "trendy", "upscale",
    "casual",
];
const TRENDY_SLOT: usize = 6;

fn planted_scores(
    config: &SynthConfig,
    positions: &[(f64, f64)],
    draws: &[RestaurantDraws],
) -> Vec<f64> {
    match &config.signal {
        PlantedSignal::None => vec![0.0; draws.len()],
        PlantedSignal::ReviewCountOdds {
            threshold,
            death_odds_multiplier,
        } => draws
            .iter()
            .map(|d| {
                if d.review_count < *threshold {
                    -death_odds_multiplier.ln()
                } else {
                    0.0
                }
            })
            .collect(),
        PlantedSignal::Attributes { weight } => draws
            .iter()
            .map(|d| {
                let z_price = (f64::from(d.price) - 2.5) / 1.25f64.sqrt();
                let z_trendy = (d.ambience[TRENDY_SLOT] as u8 as f64 - 0.5) / 0.5;
                let wifi_free = (d.wifi == 1) as u8 as f64;
                let z_wifi = (wifi_free - 1.0 / 3.0) / (2.0f64 / 9.0).sqrt();
                weight * (z_price + z_trendy + z_wifi) / 3.0f64.sqrt()
            })
            .collect(),
        PlantedSignal::Geography { weight } => {
            let index = GridIndex::new(positions.to_vec(), 500.0);
            let counts: Vec<f64> = (0..draws.len())
                .map(|i| index.within_radius(positions[i], Some(i)).len() as f64)
                .collect();
            let mean = counts.iter().sum::<f64>() / counts.len() as f64;
            let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>()
                / counts.len() as f64;
            let sd = var.sqrt().max(1e-9);
            counts.iter().map(|c| weight * (c - mean) / sd).collect()
        }
        PlantedSignal::Mobility { weight } => draws
            .iter()
            .map(|d| weight * (d.hour_spread - 0.5) * 12.0f64.sqrt())
            .collect(),
        PlantedSignal::Linguistic { weight } => draws
            .iter()
            .map(|d| weight * (d.sentiment_latent - 0.5) * 12.0f64.sqrt())
            .collect(),
    }
}

fn py_bool(b: bool) -> &'static str {
    if b {
        "True"
    } else {
        "False"
    }
}

/// Build a Yelp-style attribute map with Python-literal string values.
/// Non-planted attributes go missing with probability 0.15.
fn attribute_map(
    draw: &RestaurantDraws,
    attrs_planted: bool,
    rng: &mut ChaCha8Rng,
) -> BTreeMap<String, serde_json::Value> {
    let mut map = BTreeMap::new();
    let put = |map: &mut BTreeMap<String, serde_json::Value>,
                   rng: &mut ChaCha8Rng,
                   always: bool,
                   key: &str,
                   value: String| {
        if always || !rng.random_bool(0.15) {
            map.insert(key.to_string(), serde_json::Value::String(value));
        }
    };

    put(
        &mut map,
        rng,
        attrs_planted,
        "RestaurantsPriceRange2",
        draw.price.to_string(),
    );
    let ambience = AMBIENCE_KEYS
        .iter()
        .zip(draw.ambience.iter())
        .map(|(k, &v)| format!("'{k}': {}", py_bool(v)))
        .collect::<Vec<_>>()
        .join(", ");
    put(&mut map, rng, attrs_planted, "Ambience", format!("{{{ambience}}}"));
    let wifi = ["u'no'", "u'free'", "u'paid'"][draw.wifi as usize];
    put(&mut map, rng, attrs_planted, "WiFi", wifi.to_string());

    let alcohol = ["u'none'", "u'beer_and_wine'", "u'full_bar'"][draw.alcohol as usize];
    put(&mut map, rng, false, "Alcohol", alcohol.to_string());
    let attire = ["u'casual'", "u'dressy'", "u'formal'"][draw.attire as usize];
    put(&mut map, rng, false, "RestaurantsAttire", attire.to_string());
    for (flag, key) in draw.flags.iter().zip([
        "GoodForKids",
        "DogsAllowed",
        "OutdoorSeating",
        "BikeParking",
        "HasTV",
        "RestaurantsReservations",
        "HappyHour",
        "ByAppointmentOnly",
    ]) {
        put(&mut map, rng, false, key, py_bool(*flag).to_string());
    }
    let parking = format!(
        "{{'garage': {}, 'street': {}, 'validated': False, 'lot': {}, 'valet': False}}",
        py_bool(draw.flags[0]),
        py_bool(draw.flags[1]),
        py_bool(draw.flags[2]),
    );
    put(&mut map, rng, false, "BusinessParking", parking);
    map
}

const NEUTRAL_POOL: [&str; 72] = [
    "table", "menu", "plate", "order", "ordered", "server", "waiter", "dish", "lunch", "dinner",
    "brunch", "drink", "drinks", "appetizer", "entree", "dessert", "coffee", "tea", "bread",
    "salad", "soup", "burger", "pizza", "pasta", "chicken", "beef", "fish", "rice", "noodles",
    "sauce", "cheese", "salsa", "taco", "sandwich", "fries", "side", "portion", "bill", "check",
    "seat", "seated", "booth", "patio", "window", "parking", "street", "corner", "place",
    "location", "spot", "visit", "visited", "stopped", "tried", "came", "went", "brought",
    "asked", "told", "looked", "found", "night", "evening", "afternoon", "weekend", "week",
    "month", "people", "group", "family", "friends", "kitchen",
];

const POSITIVE_POOL: [&str; 36] = [
    "delicious", "amazing", "fantastic", "wonderful", "excellent", "perfect", "fresh", "tasty",
    "friendly", "attentive", "welcoming", "cozy", "charming", "lovely", "generous", "crisp",
    "flavorful", "juicy", "tender", "savory", "delightful", "superb", "outstanding", "impressed",
    "recommend", "favorite", "gem", "enjoyed", "loved", "best", "great", "awesome", "quick",
    "clean", "reasonable", "happy",
];

const NEGATIVE_POOL: [&str; 36] = [
    "terrible", "awful", "horrible", "disgusting", "bland", "stale", "soggy", "greasy", "cold",
    "burnt", "undercooked", "overcooked", "rude", "slow", "dirty", "noisy", "cramped",
    "overpriced", "expensive", "disappointing", "disappointed", "mediocre", "worst", "avoid",
    "refund", "complaint", "waited", "forgot", "ignored", "messy", "broken", "smelly", "watery",
    "flavorless", "inedible", "regret",
];

fn review_text(
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
    stars: u8,
    business_index: usize,
    draws: &[RestaurantDraws],
) -> String {
    let len = rng.random_range(18..=34usize);
    let mut words = Vec::with_capacity(len);
    let sentiment_pool: Option<&[&str]> = match config.review_text {
        ReviewTextMode::SentimentPools => Some(if stars >= 3 {
            &POSITIVE_POOL[..]
        } else {
            &NEGATIVE_POOL[..]
        }),
        ReviewTextMode::NeutralPool => {
            if matches!(config.signal, PlantedSignal::Linguistic { .. })
                && business_index < draws.len()
            {
                let latent = draws[business_index].sentiment_latent;
                let z = (latent - 0.5) * 12.0f64.sqrt();
                let positive = rng.random::<f64>() < sigmoid(1.5 * z);
                Some(if positive {
                    &POSITIVE_POOL[..]
                } else {
                    &NEGATIVE_POOL[..]
                })
            } else {
                None
            }
        }
    };
    for _ in 0..len {
        let word = match sentiment_pool {
            Some(pool) if rng.random_bool(0.5) => pool[rng.random_range(0..pool.len())],
            _ => NEUTRAL_POOL[rng.random_range(0..NEUTRAL_POOL.len())],
        };
        words.push(word);
    }
    // Light punctuation and casing so downstream preprocessing has work to do.
    let mut text = words.join(" ");
    if let Some(first) = text.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    text.push('.');
    text
}
