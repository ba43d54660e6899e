#!/usr/bin/env python3
"""Regenerates corpus.jsonl and ground_truth.jsonl in this directory.

Every planted fact carries one term that occurs nowhere else in the corpus.
Each question repeats that term, and the expected answer restates the fact.
Docs d01-d10 hold two planted paragraphs (two chunks each); d11-d20 hold one.
"""
import json
import pathlib

HERE = pathlib.Path(__file__).resolve().parent

# (doc_id, title, source, date, topics, [(term, fact, fillers, question, expected)])
DOCS = [
    ("d01", "Broiler Feed Additives", "Extension Bulletin 101", "2021-03-14", ["nutrition", "broiler"], [
        ("phytase",
         "Adding phytase at 500 FTU per kilogram to broiler starter feed releases bound phosphorus from plant ingredients.",
         ["Starter diets are usually fed for the first ten days.",
          "Feed should be stored dry and used within four weeks of milling.",
          "Growers should record daily feed intake for every house.",
          "Protein levels are highest in the starter phase and fall as birds age.",
          "Fresh clean feed encourages chicks to start eating within hours of placement.",
          "Any feed that smells musty should be returned to the mill."],
         "How much phytase should be added to broiler starter feed?",
         "Add phytase at about 500 FTU per kilogram of broiler starter feed so bound phosphorus from plant ingredients is released."),
        ("betaine",
         "Betaine supplementation at 1 gram per kilogram of feed helps broilers keep breast meat yield during hot weather.",
         ["Finisher diets often carry less protein than grower diets.",
          "Sudden diet changes can upset intake for a day or two.",
          "Check that feeders are set at the height of the bird's back.",
          "Coarse particles in the mash help develop the gizzard.",
          "Vitamin premixes lose potency when stored warm for long periods.",
          "Mill delivery notes should be kept with the flock records."],
         "Does betaine supplementation help broilers keep breast meat yield?",
         "Yes, betaine supplementation at 1 gram per kilogram of feed helps broilers keep breast meat yield in hot weather."),
    ]),
    ("d02", "Lighting Programs for Layers", "Layer Management Guide", "2020-08-02", ["lighting", "layer"], [
        ("photostimulation",
         "Photostimulation of pullets should start at 16 to 18 weeks by raising day length to 14 hours.",
         ["Pullets reared under short days mature more evenly.",
          "Body weight targets should be met before the flock is moved.",
          "Keep records of flock uniformity every two weeks.",
          "Hens in production usually receive sixteen hours of light each day.",
          "Light should be spread evenly without dark corners in the house.",
          "Never reduce day length once a flock is in lay."],
         "When should photostimulation of pullets start?",
         "Start photostimulation of pullets at 16 to 18 weeks, raising day length to 14 hours."),
        ("dimmer",
         "A dimmer switch lets producers lower light intensity to 5 lux in layer houses to reduce feather pecking.",
         ["Feather loss on the back and vent is an early warning sign.",
          "Enrichment such as pecking blocks keeps hens busy.",
          "Stocking density also affects how often hens peck each other.",
          "Bulbs collect dust and should be wiped between flocks.",
          "Bright spots near windows draw hens into crowded groups.",
          "Check that timers keep the correct clock after power cuts."],
         "Why use a dimmer switch in layer houses?",
         "A dimmer switch lowers light intensity to around 5 lux in layer houses, which reduces feather pecking."),
    ]),
    ("d03", "Coccidiosis Control", "Poultry Health Notes", "2019-11-20", ["disease", "coccidiosis"], [
        ("oocysts",
         "Counting oocysts per gram of litter tells broiler growers whether coccidiosis pressure is rising.",
         ["Samples should be taken from several parts of the house.",
          "Wet litter near drinkers is a common trouble spot.",
          "Results are easier to read when tracked over several flocks.",
          "Anticoccidial drugs and vaccines are the two main control options.",
          "Rotating products between flocks slows the build up of resistance.",
          "Birds recovering from the disease often grow poorly for a week."],
         "How do counts of oocysts per gram of litter help with coccidiosis?",
         "Counts of oocysts per gram of litter show broiler growers whether coccidiosis pressure in the house is rising."),
        ("amprolium",
         "Amprolium in drinking water at 0.024 percent for five days treats clinical coccidiosis in chickens.",
         ["Bloody droppings and huddled birds are typical signs of the disease.",
          "A veterinarian should confirm the diagnosis before treatment.",
          "Follow the withdrawal period on the product label.",
          "Dead birds should be examined to see which gut section is affected.",
          "Vitamin supplements can support recovery after treatment.",
          "Record each treatment with dates and batch numbers."],
         "What amprolium dose treats clinical coccidiosis in chickens?",
         "Give amprolium in drinking water at 0.024 percent for five days to treat clinical coccidiosis in chickens."),
    ]),
    ("d04", "Newcastle Disease Vaccination", "Vaccination Handbook", "2022-01-09", ["disease", "vaccination"], [
        ("lentogenic",
         "Lentogenic strains of Newcastle disease virus are used in live vaccines given by eye drop or spray.",
         ["Vaccines must be kept cold until they are used.",
          "Mix only as much vaccine as can be used within one hour.",
          "Chlorine in tap water can inactivate live vaccines.",
          "The disease spreads quickly between unvaccinated flocks.",
          "Signs include twisted necks, gasping and a sudden drop in egg production.",
          "Vaccination programmes differ by region and by the local level of challenge."],
         "Are lentogenic strains used in live Newcastle disease vaccines?",
         "Yes, lentogenic strains of Newcastle disease virus are used in live vaccines given by eye drop or spray."),
        ("haemagglutination",
         "Haemagglutination inhibition tests on serum samples measure flock antibody titres after ND vaccination.",
         ["Blood samples are normally taken from twenty birds.",
          "Titres that vary widely point to uneven vaccine delivery.",
          "Testing three weeks after vaccination gives the clearest picture.",
          "Booster doses are given to layers before they come into lay.",
          "A flock that is already sick should not be vaccinated without advice.",
          "Keep vaccine batch numbers with the flock records for traceability."],
         "What do haemagglutination inhibition tests measure after ND vaccination?",
         "Haemagglutination inhibition tests on serum measure the flock's antibody titres after ND vaccination."),
    ]),
    ("d05", "Avian Influenza Biosecurity", "Biosecurity Manual", "2023-02-27", ["disease", "biosecurity"], [
        ("footbath",
         "A footbath with fresh disinfectant at every poultry house entrance limits tracking of HPAI virus on boots.",
         ["Wild waterfowl are the main source of the virus.",
          "Visitors should be logged and kept to a minimum.",
          "Vehicles should be cleaned before entering the farm.",
          "Outbreaks must be reported to the veterinary authorities without delay.",
          "Keep separate clothing and footwear for each poultry house.",
          "Feed and bedding stores should be covered so wild birds cannot reach them."],
         "Does a footbath at the house entrance help against HPAI?",
         "Yes, a footbath with fresh disinfectant at every house entrance limits tracking of HPAI virus on boots."),
        ("fallowing",
         "Fallowing an infected farm for at least 21 days after cleaning is required before restocking poultry.",
         ["All litter and manure must be removed or composted on site.",
          "Surfaces are washed with detergent before they are disinfected.",
          "Authorities may sample the premises before approval.",
          "Culling and disposal follow the instructions of the inspectors.",
          "Equipment leaving the farm is cleaned and disinfected first.",
          "A written plan helps staff act quickly during an outbreak."],
         "How long should fallowing last before restocking poultry after HPAI?",
         "Fallowing should last at least 21 days after cleaning before poultry are restocked on an infected farm."),
    ]),
    ("d06", "Litter Management", "Housing Practices Series", "2018-06-05", ["housing", "litter"], [
        ("caking",
         "Litter caking under drinkers happens when moisture exceeds 35 percent and should be removed weekly.",
         ["Damp litter raises ammonia and footpad lesions.",
          "Adjust drinker height as birds grow.",
          "Leaking drinkers should be repaired at once.",
          "Good litter should crumble in the hand without sticking together.",
          "Turning the top layer helps it dry between flocks.",
          "Ventilation removes the moisture that birds breathe out each day."],
         "What causes litter caking under drinkers?",
         "Litter caking under drinkers happens when litter moisture goes above 35 percent; caked material should be removed weekly."),
        ("hulls",
         "Rice hulls make a cheap bedding material for broiler houses when wood shavings are scarce.",
         ["Bedding should be spread about five centimetres deep.",
          "New bedding must be free of mould.",
          "Store bedding under cover to keep it dry.",
          "Footpad scores at processing show how well litter was managed.",
          "Some farms reuse litter after heating it in windrows.",
          "Dusty litter can irritate the airways of the birds."],
         "Can rice hulls be used as bedding for broilers?",
         "Yes, rice hulls are a cheap bedding material for broiler houses when wood shavings are scarce."),
    ]),
    ("d07", "Drinking Water Quality", "Water Systems Guide", "2021-09-18", ["nutrition", "water"], [
        ("chlorination",
         "Chlorination of poultry drinking water to 3 to 5 ppm free chlorine controls bacterial growth in lines.",
         ["Birds drink roughly twice as much as they eat.",
          "Test the source for minerals at least once a year.",
          "A water meter on every house shows intake changes early.",
          "Water temperature above twenty five degrees reduces intake.",
          "High iron or manganese can block nipples over time.",
          "Acidifiers are sometimes added to support gut health."],
         "What chlorination level keeps poultry drinking water lines clean?",
         "Chlorination of drinking water to 3 to 5 ppm free chlorine controls bacterial growth in poultry water lines."),
        ("biofilm",
         "Biofilm inside nipple drinker lines should be flushed out with hydrogen peroxide between flocks.",
         ["High pressure flushing removes loose sediment.",
          "Run clean water through the lines before birds arrive.",
          "Check several nipples at the end of each line.",
          "Header tanks should have tight lids to keep out dirt and insects.",
          "Medication through the water needs lines free of residue.",
          "Sample the water at the end of the line, not just at the source."],
         "How do I remove biofilm from nipple drinker lines?",
         "Flush biofilm out of nipple drinker lines with hydrogen peroxide between flocks."),
    ]),
    ("d08", "Heat Stress in Broilers", "Climate Control Notes", "2022-07-11", ["management", "heat stress"], [
        ("panting",
         "Panting is the first sign of heat stress in broilers and begins above 30 degrees Celsius.",
         ["Heavy birds near market age suffer the most.",
          "Avoid disturbing the flock in the hottest hours.",
          "Provide extra drinker space during hot spells.",
          "Birds spread their wings and sit near walls to lose heat.",
          "Feed can be withdrawn for a few hours during the hottest part of the day.",
          "Cool fresh water helps birds keep their body temperature down."],
         "At what temperature does panting begin in broilers?",
         "Panting begins above about 30 degrees Celsius and is the first sign of heat stress in broilers."),
        ("evaporative",
         "Evaporative cooling pads lower house temperature by up to 10 degrees when relative humidity is low.",
         ["Pads must be kept clean and evenly wet.",
          "Air speed over the birds adds a further cooling effect.",
          "Check the pump and distribution pipe before summer.",
          "Tunnel fans create wind chill that helps large birds cope.",
          "Foggers add cooling but can wet the litter if overused.",
          "Night time temperatures matter because birds need to recover."],
         "How much can evaporative cooling pads lower house temperature?",
         "Evaporative cooling pads can lower house temperature by up to 10 degrees when relative humidity is low."),
    ]),
    ("d09", "Turkey Health and Welfare", "Turkey Producers Digest", "2017-04-22", ["turkey", "disease"], [
        ("snood",
         "Snood pecking among turkey toms is reduced by trimming beaks at the hatchery.",
         ["Toms grow faster and heavier than hens.",
          "Lower light levels calm large turkeys.",
          "Separate injured birds quickly to stop further damage.",
          "Turkeys need more floor space per bird as they grow.",
          "Poor feathering makes damage easier to see and harder to treat.",
          "Keep a close watch on birds during the first weeks after placement."],
         "How can snood pecking among turkeys be reduced?",
         "Snood pecking among turkey toms is reduced by trimming beaks at the hatchery."),
        ("blackhead",
         "Blackhead disease in turkeys is caused by Histomonas and spreads through caecal worms.",
         ["Do not raise turkeys on ground used for chickens.",
          "Sulphur coloured droppings are a common sign.",
          "Good worm control lowers the risk on range.",
          "Outbreaks can cause heavy losses within a few days.",
          "There are few approved treatments in many countries.",
          "Keep turkeys away from areas where droppings from chickens collect.",
          "Clean drinkers daily while birds are being treated."],
         "What causes blackhead disease in turkeys?",
         "Blackhead disease in turkeys is caused by Histomonas, which spreads through caecal worms."),
    ]),
    ("d10", "Duck Husbandry", "Waterfowl Guide", "2020-05-30", ["duck", "management"], [
        ("preen",
         "Ducks need open water deep enough to dip their heads so they can preen and keep eyes healthy.",
         ["Troughs are easier to keep clean than ponds.",
          "Ducks produce wet droppings so bedding needs frequent topping up.",
          "Place water over a drained area to keep the floor dry.",
          "Ducks are hardy and resist many common poultry diseases.",
          "Sore eyes and crusty nostrils show that water access is poor.",
          "Fences should keep predators out of night shelters."],
         "Why do ducks need water deep enough to preen?",
         "Ducks need open water deep enough to dip their heads so they can preen and keep their eyes healthy."),
        ("duckweed",
         "Duckweed grown in farm ponds can replace part of the soybean meal in duck rations.",
         ["Ducks do well on pelleted feed of the right size.",
          "Grain can be offered in water to reduce waste.",
          "Young ducklings need higher protein than adults.",
          "Allow ducks to graze pasture to cut feed costs.",
          "Feed should be given in troughs that ducks cannot walk through.",
          "Fresh greens can be offered as a small part of the diet."],
         "Can duckweed replace soybean meal in duck rations?",
         "Yes, duckweed grown in farm ponds can replace part of the soybean meal in duck rations."),
    ]),
    ("d11", "Marek's Disease Prevention", "Hatchery Practice Sheet", "2021-12-01", ["disease", "vaccination"], [
        ("ovo",
         "In ovo vaccination against Marek's disease is done at 18 days of incubation.",
         ["Chicks are then protected before they meet the field virus.",
          "Hatchery hygiene keeps early exposure low."],
         "When is in ovo vaccination against Marek's disease done?",
         "In ovo vaccination against Marek's disease is done at 18 days of incubation."),
    ]),
    ("d12", "Egg Quality Assessment", "Egg Marketing Bulletin", "2019-03-03", ["eggs", "quality"], [
        ("haugh",
         "Haugh units measure albumen height and are the standard index of egg freshness.",
         ["Eggs lose quality quickly at room temperature.",
          "Cool storage slows the thinning of the white."],
         "What do Haugh units measure in eggs?",
         "Haugh units measure albumen height and are the standard index of egg freshness."),
    ]),
    ("d13", "Tunnel Ventilation", "Climate Control Notes", "2022-07-12", ["management", "ventilation"], [
        ("anemometer",
         "An anemometer reading of 2.5 meters per second at bird height confirms tunnel ventilation is working.",
         ["Seal air leaks along the side walls.",
          "Fans need clean shutters and tight belts."],
         "What anemometer reading confirms tunnel ventilation in a broiler house?",
         "An anemometer reading of about 2.5 meters per second at bird height confirms tunnel ventilation is working."),
    ]),
    ("d14", "Feed Conversion Efficiency", "Extension Bulletin 114", "2020-10-10", ["nutrition", "performance"], [
        ("pelleting",
         "Good pelleting quality with fewer than 10 percent fines improves FCR in broilers.",
         ["Feed wastage from poorly set feeders raises costs.",
          "Weigh a sample of birds every week."],
         "Does pelleting quality improve FCR in broilers?",
         "Yes, good pelleting quality with fewer than 10 percent fines improves FCR in broilers."),
    ]),
    ("d15", "Breeder Flock Fertility", "Breeder Management Guide", "2018-02-14", ["reproduction", "breeder"], [
        ("spiking",
         "Spiking broiler breeder flocks with young males at 40 weeks restores fertility.",
         ["Older males mate less often as they gain weight.",
          "Check male condition and feet regularly."],
         "When should spiking with young males be done in broiler breeder flocks?",
         "Spiking broiler breeder flocks with young males at around 40 weeks restores fertility."),
    ]),
    ("d16", "Necrotic Enteritis", "Poultry Health Notes", "2019-11-21", ["disease", "gut health"], [
        ("perfringens",
         "Clostridium perfringens overgrowth in the small intestine causes necrotic enteritis in broilers.",
         ["Outbreaks often follow coccidial damage to the gut.",
          "Diets high in wheat can raise the risk."],
         "Is Clostridium perfringens the cause of necrotic enteritis in broilers?",
         "Yes, overgrowth of Clostridium perfringens in the small intestine causes necrotic enteritis in broilers."),
    ]),
    ("d17", "Ammonia Control", "Housing Practices Series", "2018-06-06", ["housing", "air quality"], [
        ("zeolite",
         "Adding zeolite to litter binds ammonia and keeps NH3 below 25 ppm in poultry houses.",
         ["High ammonia harms the eyes and lungs of birds.",
          "Minimum ventilation must run even in cold weather."],
         "Can zeolite in litter reduce ammonia in poultry houses?",
         "Yes, zeolite added to litter binds ammonia and keeps NH3 below 25 ppm in poultry houses."),
    ]),
    ("d18", "Hatchery Incubation", "Hatchery Practice Sheet", "2021-12-02", ["reproduction", "incubation"], [
        ("candling",
         "Candling eggs at day 10 of incubation identifies infertile eggs for removal.",
         ["Turning eggs during the first two weeks prevents sticking.",
          "Record hatch results for each breeder flock."],
         "When should candling of eggs be done during incubation?",
         "Candling at day 10 of incubation identifies infertile eggs so they can be removed."),
    ]),
    ("d19", "Quail Production", "Small Flock Series", "2023-05-19", ["quail", "production"], [
        ("coturnix",
         "Coturnix quail start laying at six weeks of age and produce nearly one egg per day.",
         ["Quail need a diet higher in protein than chickens.",
          "Small wire floors keep the birds clean."],
         "At what age do coturnix quail start laying?",
         "Coturnix quail start laying at about six weeks of age and produce nearly one egg per day."),
    ]),
    ("d20", "Free Range Layer Systems", "Small Flock Series", "2023-05-20", ["layer", "free range"], [
        ("netting",
         "Electric netting around free range paddocks keeps foxes away from laying hens.",
         ["Shade and cover encourage hens to use the range.",
          "Rotate paddocks to rest the ground."],
         "Does electric netting protect free range hens from foxes?",
         "Yes, electric netting around free range paddocks keeps foxes away from laying hens."),
    ]),
]


def main() -> None:
    docs, truth = [], []
    for doc_id, title, source, date, topics, facts in DOCS:
        paragraphs = [" ".join([fact, *fillers]) for _, fact, fillers, _, _ in facts]
        docs.append({
            "doc_id": doc_id,
            "title": title,
            "source": source,
            "publication_date": date,
            "topics": topics,
            "body": "\n\n".join(paragraphs),
        })
        for ordinal, (term, _, _, question, expected) in enumerate(facts):
            truth.append({
                "id": f"q{len(truth) + 1:02d}",
                "question": question,
                "expected_answer": expected,
                "tags": [f"planted_term:{term}", f"planted_doc:{doc_id}", f"planted_paragraph:{ordinal}"],
            })
    with open(HERE / "corpus.jsonl", "w", encoding="utf-8") as f:
        for d in docs:
            f.write(json.dumps(d, ensure_ascii=False) + "\n")
    with open(HERE / "ground_truth.jsonl", "w", encoding="utf-8") as f:
        for t in truth:
            f.write(json.dumps(t, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
